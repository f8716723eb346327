use super::operator::RadialOperator;
use super::tridiag::{solve_shifted, sym_matvec};
use crate::error::{arg_err, Result};

/// `Z_t(r_i) = (e^{-t H} 1)(r_i)` on the cell centres by Crank-Nicolson with
/// `steps` equal steps, in the symmetric form.
pub fn survival_profile(op: &RadialOperator, t: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return arg_err(format!("time must be finite and >= 0 (got {t})"));
    }
    if steps == 0 {
        return arg_err("need at least one time step");
    }
    let (a, b) = op.symmetric_form();
    let sw: Vec<f64> = op.weights().iter().map(|w| w.sqrt()).collect();
    let mut y = sw.clone();
    if t == 0.0 {
        return Ok(vec![1.0; op.cells()]);
    }
    let dt = t / steps as f64;
    let shift = -2.0 / dt;
    for _ in 0..steps {
        let sy = sym_matvec(&a, &b, &y);
        // (I + dt/2 S) y' = (I - dt/2 S) y  <=>  (S + 2/dt) y' = (2/dt) y - S y
        let rhs: Vec<f64> = y.iter().zip(&sy).map(|(v, s)| -shift * v - s).collect();
        y = solve_shifted(&a, &b, shift, &rhs)?;
    }
    Ok(y.iter().zip(&sw).map(|(v, s)| v / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::OuterBoundary;

    #[test]
    fn constant_potential_decays_exactly() {
        let op = RadialOperator::build(2, 10.0, 200, OuterBoundary::Reflecting, |_| 0.3).unwrap();
        let z = survival_profile(&op, 2.0, 400).unwrap();
        for v in z {
            assert!((v - (-0.6f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let op = RadialOperator::build(2, 10.0, 100, OuterBoundary::Dirichlet, |_| 0.0).unwrap();
        assert!(survival_profile(&op, 0.0, 10).unwrap().iter().all(|v| *v == 1.0));
    }
}
