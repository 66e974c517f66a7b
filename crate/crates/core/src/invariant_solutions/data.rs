//! Reductions by one-dimensional subalgebras, one entry per representative.

pub(crate) struct OrbitDef {
    pub group: &'static [&'static str],
    pub h: &'static str,
    pub k: &'static str,
    pub lower: &'static [&'static str],
    pub upper: &'static [&'static str],
}

pub(crate) struct AnsatzDef {
    pub family: &'static str,
    pub subalgebra: &'static str,
    /// Curve parameter; `x` unless the reduction is parametric.
    pub variable: &'static str,
    pub unknowns: &'static [&'static str],
    pub free: &'static [(&'static str, f64)],
    /// `(alias, function parameter, argument templates)`
    pub calls: &'static [(&'static str, &'static str, &'static [&'static str])],
    pub abscissa: Option<&'static str>,
    /// Empty for reductions without a closed form.
    pub h: &'static str,
    pub k: &'static str,
    pub j1: &'static str,
    pub j2: &'static str,
    pub constraints: &'static [&'static str],
    /// Each must be positive at an admissible root.
    pub admissible: &'static [&'static str],
    pub lower: &'static [&'static str],
    pub upper: &'static [&'static str],
    pub orbit: Option<OrbitDef>,
}

const NONE: &[&str] = &[];

const fn translation(family: &'static str, constraints: &'static [&'static str], orbit: Option<OrbitDef>) -> AnsatzDef {
    AnsatzDef {
        family,
        subalgebra: "X1",
        variable: "x",
        unknowns: &["B"],
        free: &[("A", 1.0)],
        calls: &[],
        abscissa: None,
        h: "A",
        k: "x - B",
        j1: "y",
        j2: "x - x_",
        constraints,
        admissible: &["B"],
        lower: &["0"],
        upper: &["10"],
        orbit,
    }
}

pub(crate) static ANSATZE: &[AnsatzDef] = &[
    AnsatzDef {
        family: "A2,2",
        subalgebra: "X2",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[("fA", "f", &["A"]), ("gA", "g", &["A"])],
        abscissa: None,
        h: "A*x",
        k: "B*x",
        j1: "y/x",
        j2: "x_/x",
        constraints: &["A - fA", "B - gA"],
        admissible: &["B", "1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: Some(OrbitDef { group: &["alpha"], h: "A*x + alpha", k: "B*x", lower: &["1"], upper: &["10"] }),
    },
    AnsatzDef {
        family: "A2,4",
        subalgebra: "X1 + a X2",
        variable: "x",
        unknowns: &["a", "B"],
        free: &[("A", 0.0)],
        calls: &[("fa", "f", &["a"]), ("gBa", "g", &["B*a"])],
        abscissa: None,
        h: "a*x + A",
        k: "x - B",
        j1: "y - a*x",
        j2: "x - x_",
        constraints: &["a - fa", "B - gBa"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["10"],
        orbit: None,
    },
    translation("A3,2", &["B"], None),
    AnsatzDef {
        family: "A3,2",
        subalgebra: "X1 + X2",
        variable: "x",
        unknowns: &["B"],
        free: &[("A", 0.0)],
        calls: &[],
        abscissa: None,
        h: "x + A",
        k: "x - B",
        j1: "y - x",
        j2: "x - x_",
        constraints: &["C1 - 1", "B - C2*B^(1/a)"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,2",
        subalgebra: "X1 - X2",
        variable: "x",
        unknowns: &["B"],
        free: &[("A", 0.0)],
        calls: &[],
        abscissa: None,
        h: "A - x",
        k: "x - B",
        j1: "y + x",
        j2: "x - x_",
        constraints: &["C1 - 1", "B - C2*(-B)^(1/a)"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,2",
        subalgebra: "X3",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*x^a",
        k: "B*x",
        j1: "y/x^a",
        j2: "x_/x",
        constraints: &["a - C1*(1 - B^a)/(1 - B)", "1 - B - C2*(A*(1 - B^a))^(1/a)"],
        admissible: &["B", "1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: Some(OrbitDef {
            group: &["alpha", "beta"],
            h: "alpha + A*(x - beta)^a",
            k: "beta + B*(x - beta)",
            lower: &["1 + beta"],
            upper: &["10 + beta"],
        }),
    },
    translation(
        "A3,4",
        &["C1", "B - C2"],
        Some(OrbitDef { group: &["alpha"], h: "A + alpha*x", k: "x - B", lower: &["0"], upper: &["10"] }),
    ),
    AnsatzDef {
        family: "A3,4",
        subalgebra: "X3",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "x*log(abs(x)) + A*x",
        k: "B*x",
        j1: "y/x - log(abs(x))",
        j2: "x_/x",
        constraints: &["B*log(abs(B))/(1 - B) - C1 + 1", "(1 - B)*abs(B)^(B/(1 - B)) - C2*exp(A)"],
        admissible: &["B", "1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: Some(OrbitDef {
            group: &["alpha", "beta"],
            h: "alpha + (x - beta)*log(abs(x - beta)) + A*(x - beta)",
            k: "beta + B*(x - beta)",
            lower: &["1 + beta"],
            upper: &["10 + beta"],
        }),
    },
    translation("A3,6", &["C1", "B - C2"], None),
    AnsatzDef {
        family: "A3,6",
        subalgebra: "X3",
        variable: "s",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: Some("A*exp(-b*s)*cos(s)"),
        h: "A*exp(-b*s)*sin(s)",
        k: "s - B",
        j1: "exp(b*atan(y/x))*sqrt(x^2 + y^2)",
        j2: "atan(y/x) - atan(y_/x_)",
        constraints: &[
            "b - (cos(B) - exp(-b*B) + C1*sin(B))/(sin(B) - C1*(cos(B) - exp(-b*B)))",
            "A*exp(b*atan2(exp(b*B)*sin(B), 1 - exp(b*B)*cos(B)))*sqrt(1 - 2*exp(b*B)*cos(B) + exp(2*b*B)) - C2",
        ],
        admissible: &["A"],
        // chord to the delayed point in the right half plane, on one monotone arc
        lower: &["-pi/2 - atan2(exp(b*B)*sin(B), 1 - exp(b*B)*cos(B))", "-atan(b) - pi"],
        upper: &["pi/2 - atan2(exp(b*B)*sin(B), 1 - exp(b*B)*cos(B))", "-atan(b)"],
        orbit: None,
    },
    translation("A3,8alt", &["C1/A", "B - C2*A^2"], None),
    AnsatzDef {
        family: "A3,8alt",
        subalgebra: "X2",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*sqrt(x)",
        k: "B*x",
        j1: "y/sqrt(x)",
        j2: "x_/x",
        constraints: &["A/2 - A/(1 + sqrt(B)) - C1/A", "1/sqrt(B) - sqrt(B) - C2*A^2"],
        admissible: &["B", "1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,8alt",
        subalgebra: "X1 + X3",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*sqrt(1 + x^2)",
        k: "(x - B)/(1 + B*x)",
        j1: "y/sqrt(1 + x^2)",
        j2: "atan(x) - atan(x_)",
        constraints: &["A/B*(1 - sqrt(B^2 + 1)) + C1/A", "B - C2*A^2*sqrt(B^2 + 1)"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["5"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,9",
        subalgebra: "X2",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*x",
        k: "B*x",
        j1: "y/x",
        j2: "x_/x",
        constraints: &[
            "A - (A^2*(1 - B)^2 + B^2 - 1 + 2*C1*A*(1 - B))/(2*A*(1 - B) - C1*(A^2*(1 - B)^2 + B^2 - 1))",
            "(A^2 + 1)*(1 - B)^2 - C2*B",
        ],
        admissible: &["B", "1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,9",
        subalgebra: "X1 + X3",
        variable: "x",
        unknowns: &[],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "",
        k: "",
        j1: "(y^2 + x^2 + 1)/x",
        j2: "atan((y^2 + x^2 - 1)/(2*y)) - atan((y_^2 + x_^2 - 1)/(2*y_))",
        constraints: NONE,
        admissible: NONE,
        lower: NONE,
        upper: NONE,
        orbit: None,
    },
    AnsatzDef {
        family: "A3,10alt",
        subalgebra: "X1",
        variable: "x",
        unknowns: &["B"],
        free: &[("A", 1.0)],
        calls: &[],
        abscissa: None,
        h: "x + A",
        k: "x - B",
        j1: "y - x",
        j2: "x - x_",
        constraints: &["1 - C1*((A + B)/B)^2", "B^2/A^2 - C2"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,10alt",
        subalgebra: "X2",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*x",
        k: "B*x",
        j1: "y/x",
        j2: "x_/x",
        constraints: &["A - C1*((A - B)/(1 - B))^2", "A*(1 - B)^2/((A - 1)^2*B) - C2"],
        admissible: &["1 - B"],
        lower: &["1"],
        upper: &["10"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,10alt",
        subalgebra: "X1 + X3",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "(x + A)/(1 - A*x)",
        k: "(x - B)/(1 + B*x)",
        j1: "atan(y) - atan(x)",
        j2: "atan(x) - atan(x_)",
        constraints: &["1 + A^2 - C1*(1 + A/B)^2", "(1 + A^2)*B^2/(A^2*(1 + B^2)) - C2"],
        admissible: &["B"],
        lower: &["0"],
        upper: &["1/(2*abs(A))", "2"],
        orbit: None,
    },
    AnsatzDef {
        family: "A3,12",
        subalgebra: "X1",
        variable: "x",
        unknowns: &["A", "B"],
        free: &[],
        calls: &[],
        abscissa: None,
        h: "A*sqrt(1 + x^2)",
        k: "(x - B)/(1 + B*x)",
        j1: "y/sqrt(1 + x^2)",
        j2: "atan(x) - atan(x_)",
        constraints: &[
            "A/(1 + A^2)*(1 - 1/sqrt(1 + B^2)) - C1",
            "(1/sqrt(1 + B^2) + A^2)^2 - (1 - C2)*(1 + A^2)^2",
        ],
        admissible: &["B"],
        lower: &["-1/(2*B)", "-1"],
        upper: &["1"],
        orbit: None,
    },
];
