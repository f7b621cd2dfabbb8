use super::engine::Cylinder;
use super::family::Tower;
use super::level_set::LevelSet;
use crate::error::{Error, Result};
use crate::measure::MeasureValue;

impl Tower {
    /// `mu(T^j A ∩ B)`.
    pub fn correlation(&self, a: &LevelSet, b: &LevelSet, j: i128) -> Result<MeasureValue> {
        self.cylinder_correlation(&Cylinder::new(a.clone()), &Cylinder::new(b.clone()), j)
    }

    /// `prod_t mu(T^{powers[t] i} As[t] ∩ Bs[t])`, the product-measure correlation of
    /// `T^{powers[0]} x ... x T^{powers[k-1]}` at time `i`.
    pub fn product_correlation(
        &self,
        a_sets: &[LevelSet],
        b_sets: &[LevelSet],
        powers: &[i128],
        i: i128,
    ) -> Result<MeasureValue> {
        if a_sets.len() != b_sets.len() || a_sets.len() != powers.len() || a_sets.is_empty() {
            return Err(Error::LengthMismatch(format!(
                "{} source sets, {} target sets, {} powers",
                a_sets.len(),
                b_sets.len(),
                powers.len()
            )));
        }
        if let Some(p) = powers.iter().find(|&&p| p == 0) {
            return Err(Error::Invalid(format!("power {p} must be nonzero")));
        }
        let mut out = MeasureValue::one();
        for ((a, b), &p) in a_sets.iter().zip(b_sets).zip(powers) {
            let lag = p.checked_mul(i).ok_or_else(|| Error::Overflow("lag".into()))?;
            let v = self.correlation(a, b, lag)?;
            if v.is_zero() {
                return Ok(v);
            }
            out = out * v;
        }
        Ok(out)
    }

    /// `mu(T^{pi} A ∩ T^{qi} A ∩ A)`.
    pub fn triple_correlation(&self, a: &LevelSet, p: i128, q: i128, i: i128) -> Result<MeasureValue> {
        let c = Cylinder::new(a.clone());
        let lp = p.checked_mul(i).ok_or_else(|| Error::Overflow("lag".into()))?;
        let lq = q.checked_mul(i).ok_or_else(|| Error::Overflow("lag".into()))?;
        self.triple_measure([(&c, 0), (&c, -lp), (&c, -lq)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afs::AfsParams;

    #[test]
    fn product_and_triple() {
        let t = Tower::afs(AfsParams::constant(3, 10, 4, 20));
        let i = LevelSet::single(0, 0);
        let both = t
            .product_correlation(&[i.clone(), i.clone()], &[i.clone(), i.clone()], &[1, 2], 2)
            .unwrap();
        let expect = t.correlation(&i, &i, 2).unwrap() * t.correlation(&i, &i, 4).unwrap();
        assert_eq!(both, expect);
        assert!(t.product_correlation(std::slice::from_ref(&i), &[], &[1], 1).is_err());
        assert_eq!(t.triple_correlation(&i, 1, 2, 0).unwrap(), MeasureValue::one());
    }
}
