use serde::Serialize;

/// A concrete counterexample. Values are decimal strings, rationals `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ViolationReport {
    /// `v^[t2](s2) - v^[t2](s) = upper_gain < lower_gain = v^[t](s2) - v^[t](s)`.
    SingleCrossing {
        t: u64,
        t2: u64,
        s: u64,
        s2: u64,
        upper_gain: String,
        lower_gain: String,
    },
    /// At `profile` the player gets `quantity`; raising its report to `t2`
    /// gives the smaller `quantity2`.
    Monotonicity {
        player: usize,
        profile: Vec<u64>,
        t2: u64,
        quantity: u64,
        quantity2: u64,
    },
    /// As above, but the two valuations value the lost items differently:
    /// `upper_gain` for the report `t2`, `lower_gain` for the report in
    /// `profile`.
    TieBreakMonotonicity {
        player: usize,
        profile: Vec<u64>,
        t2: u64,
        quantity: u64,
        quantity2: u64,
        upper_gain: String,
        lower_gain: String,
    },
    /// Reporting `misreport` instead of the true index in `profile` pays off.
    Incentive {
        player: usize,
        profile: Vec<u64>,
        misreport: u64,
        truthful_utility: String,
        misreport_utility: String,
    },
    IndividualRationality {
        player: usize,
        profile: Vec<u64>,
        utility: String,
    },
    SketchSize {
        size: u64,
        bound: u64,
    },
    /// `v^[t](s) - v^[t]^K(s)` is not below `allowance`.
    SketchError {
        t: u64,
        s: u64,
        value: String,
        projected: String,
        allowance: String,
    },
    /// Projected valuations `t < t2` cross at `(s, s2)`.
    SketchOrder {
        t: u64,
        t2: u64,
        s: u64,
        s2: u64,
    },
    /// Dropping `dropped` costs no valuation a factor `factor` anywhere.
    SketchExists {
        dropped: u64,
        factor: u64,
    },
    Ratio {
        welfare: String,
        opt: String,
        ratio: String,
        required: String,
    },
}

impl ViolationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
