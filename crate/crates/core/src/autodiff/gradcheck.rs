//! Central-difference verification of tape gradients.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tape::{Tape, Var};
use super::tensor::Tensor;

/// Step used throughout the test-suite for double precision.
pub const DEFAULT_STEP: f64 = 1e-5;

fn evaluate<T, F>(f: &mut F, params: &[Tensor<T>]) -> Result<(Tape<T>, Vec<Var>, Var)>
where
    T: Scalar,
    F: FnMut(&mut Tape<T>, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p)).collect();
    let loss = f(&mut tape, &vars)?;
    Ok((tape, vars, loss))
}

fn scalar_value<T, F>(f: &mut F, params: &[Tensor<T>], which: (usize, usize)) -> Result<T>
where
    T: Scalar,
    F: FnMut(&mut Tape<T>, &[Var]) -> Result<Var>,
{
    let (tape, _, loss) = evaluate(f, params)?;
    let v = tape.tensor(loss).item()?;
    if !v.is_finite() {
        return Err(Error::numeric(
            "gradient_check",
            format!("non-finite output {v} at parameter {} entry {}", which.0, which.1),
        ));
    }
    Ok(v)
}

/// Max relative error between tape gradients and central differences over
/// every entry of every parameter tensor. `f` receives one trainable leaf
/// per parameter and must return a one-element loss.
pub fn gradient_check<T, F>(f: F, params: &[Tensor<T>], step: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(&mut Tape<T>, &[Var]) -> Result<Var>,
{
    let entries: Vec<(usize, usize)> = params
        .iter()
        .enumerate()
        .flat_map(|(p, t)| (0..t.numel()).map(move |i| (p, i)))
        .collect();
    gradient_check_entries(f, params, step, &entries)
}

/// Same as [`gradient_check`] restricted to the listed `(parameter, entry)`
/// positions; used where a full sweep over every weight is too expensive.
pub fn gradient_check_entries<T, F>(mut f: F, params: &[Tensor<T>], step: T, entries: &[(usize, usize)]) -> Result<T>
where
    T: Scalar,
    F: FnMut(&mut Tape<T>, &[Var]) -> Result<Var>,
{
    if step.is_nan() || step <= T::zero() {
        return Err(Error::contract("step", "must be positive"));
    }
    let (mut tape, vars, loss) = evaluate(&mut f, params)?;
    let base = tape.tensor(loss).item()?;
    if !base.is_finite() {
        return Err(Error::numeric("gradient_check", format!("non-finite output {base}")));
    }
    tape.backward(loss)?;
    let analytic: Vec<Vec<T>> = vars.iter().map(|v| tape.grad(*v).to_vec()).collect();
    drop(tape);

    let mut work = params.to_vec();
    let floor = T::lit(1e-8);
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for &(p, i) in entries {
        let orig = work[p].values()[i];
        work[p].values_mut()[i] = orig + step;
        let plus = scalar_value(&mut f, &work, (p, i))?;
        work[p].values_mut()[i] = orig - step;
        let minus = scalar_value(&mut f, &work, (p, i))?;
        work[p].values_mut()[i] = orig;

        let central = (plus - minus) / (two * step);
        let a = analytic[p][i];
        let rel = (a - central).abs() / a.abs().max(central.abs()).max(floor);
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function_has_zero_gradients() {
        let params = vec![Tensor::<f64>::matrix(2, 2, vec![1.0, -2.0, 0.5, 3.0]).unwrap()];
        let mut seen = Vec::new();
        let err = gradient_check(
            |tape, vars| {
                let c = tape.constant(Tensor::scalar(4.0));
                // touch the parameter without depending on it
                seen.push(tape.value(vars[0]).len());
                Ok(c)
            },
            &params,
            1e-5,
        )
        .unwrap();
        assert_eq!(err, 0.0);

        let mut tape = Tape::<f64>::new();
        let v = tape.param(&params[0]);
        let zero = tape.affine(v, 0.0, 1.0).unwrap();
        let s = tape.sum(zero).unwrap();
        tape.backward(s).unwrap();
        assert!(tape.grad(v).iter().all(|g| *g == 0.0));
    }

    #[test]
    fn rejects_non_positive_step() {
        let params = vec![Tensor::<f64>::scalar(1.0)];
        let r = gradient_check(|t, v| t.sum(v[0]), &params, 0.0);
        assert!(matches!(r, Err(Error::Contract { .. })));
    }

    #[test]
    fn non_finite_output_names_parameter() {
        let params = vec![Tensor::<f64>::matrix(1, 2, vec![1.0, 1e-6]).unwrap()];
        // log of the second entry goes negative at the minus perturbation
        let r = gradient_check(
            |t, v| {
                let c = t.clamp(v[0], -1.0, 10.0)?;
                let s = t.affine(c, 1.0, 0.0)?;
                let l = t
                    .log(s)
                    .or_else(|_| Ok::<_, Error>(t.constant(Tensor::scalar(f64::NAN))))?;
                t.sum(l)
            },
            &params,
            1e-5,
        );
        match r {
            Err(Error::Numeric { detail, .. }) => assert!(detail.contains("parameter 0 entry 1")),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }
}
