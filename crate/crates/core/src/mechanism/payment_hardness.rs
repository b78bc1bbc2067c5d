use crate::domain::generators::gen_payment_hardness_instance;
use crate::domain::CnfFormula;
use crate::error::Result;
use crate::rational::Rational;
use crate::verify::count_satisfying;

/// Both sides of `P(m) - P(0) = (m^2 + m)/2 - l` for Alice's payment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaymentIdentity {
    pub lhs: Rational,
    pub rhs: Rational,
    pub satisfying: u64,
}

impl PaymentIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Computes Alice's payment difference from the allocation rule alone, as
/// `m f(m)` minus the integral of `f` over `[0, m]`, and compares it with the
/// count of satisfying assignments. The rule is constant on every open
/// interval `(z, z + 1)`, where Alice gets `z` items plus one more if
/// assignment `z` satisfies the formula.
pub fn payment_hardness_check(vars: u32, formula: &CnfFormula) -> Result<PaymentIdentity> {
    let inst = gen_payment_hardness_instance(vars, formula.clone())?;
    let m = inst.m;
    let integral: u64 = (0..m).map(|z| z + u64::from(formula.satisfied_by(z))).sum();
    let lhs = m * inst.alice_items(m) - integral;
    let satisfying = count_satisfying(formula)?;
    let rhs = Rational::new((m * m + m).into(), 2.into()) - Rational::from_integer(satisfying.into());
    Ok(PaymentIdentity {
        lhs: Rational::from_integer(lhs.into()),
        rhs,
        satisfying,
    })
}
