//! ESPRIT with uniform and long-CP-aware shift selection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigenvalues, product, solve_hpd, CMat};
use crate::numerology::{CpMethod, Numerology};
use crate::spectrum::Axis;

use super::eigen::EigenSplit;

/// Row pairs `(l, l + 1)` of the subspace used as the two shifted arrays.
///
/// Method III keeps only the hops whose duration is exactly one normal-CP
/// symbol, which drops every hop that spans a long CP.
pub fn shift_pairs(num: &Numerology, axis: Axis, method: Option<CpMethod>, dim: usize) -> Result<Vec<usize>> {
    if dim < 2 {
        return Err(Error::DegenerateSubspace(format!("{dim} rows leave no shift")));
    }
    match (axis, method) {
        (Axis::Doppler, Some(CpMethod::Exact)) => {
            let normal = num.normal_symbol_samples();
            let mut rows = Vec::with_capacity(dim - 1);
            for l in 0..dim - 1 {
                if num.start_sample(l + 1)? - num.start_sample(l)? == normal {
                    rows.push(l);
                }
            }
            Ok(rows)
        }
        (Axis::Doppler, None) => Err(Error::InvalidParameter("Doppler ESPRIT needs a CP method".into())),
        _ => Ok((0..dim - 1).collect()),
    }
}

/// Eigenvalues of the rotation operator `(J2^H J2)^{-1} J2^H J1`.
pub fn rotation_eigenvalues(split: &EigenSplit, num: &Numerology, method: Option<CpMethod>) -> Result<Vec<c64>> {
    let p = split.order();
    if split.dim() < p + 1 {
        return Err(Error::DegenerateSubspace(format!(
            "{} rows cannot support {p} rotational invariances",
            split.dim()
        )));
    }
    let rows = shift_pairs(num, split.axis, method, split.dim())?;
    if rows.len() < p {
        return Err(Error::DegenerateSubspace(format!("only {} usable shifts for order {p}", rows.len())));
    }
    let es = &split.signal_basis;
    let j1 = CMat::from_fn(rows.len(), p, |i, c| es[(rows[i], c)]);
    let j2 = CMat::from_fn(rows.len(), p, |i, c| es[(rows[i] + 1, c)]);
    let a = product(j2.adjoint(), j2.as_ref(), 1.0);
    let b = product(j2.adjoint(), j1.as_ref(), 1.0);
    let rotation = solve_hpd(a.as_ref(), b.as_ref())?;
    eigenvalues(rotation.as_ref())
}

/// Parameter estimates in ascending order: delays in seconds or Dopplers in Hz.
///
/// Doppler rows advance as `exp(j 2 pi f T)`, so the operator's eigenvalues
/// are `exp(-j 2 pi f T)`. Delay rows advance as `exp(-j 2 pi tau delta_f)`,
/// giving eigenvalues `exp(+j 2 pi tau delta_f)`.
pub fn esprit(split: &EigenSplit, num: &Numerology, method: Option<CpMethod>) -> Result<Vec<f64>> {
    let lambdas = rotation_eigenvalues(split, num, method)?;
    let mut out: Vec<f64> = match split.axis {
        Axis::Doppler => {
            let m = method.ok_or_else(|| Error::InvalidParameter("Doppler ESPRIT needs a CP method".into()))?;
            let t = num.nominal_spacing(m);
            lambdas.iter().map(|z| -z.arg() / (2.0 * PI * t)).collect()
        }
        Axis::Delay => {
            let df = num.delta_f();
            lambdas.iter().map(|z| z.arg() / (2.0 * PI * df)).collect()
        }
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_symbol_domain, Target, TargetSet};
    use crate::subspace::covariance::{delay_covariance, doppler_covariance};
    use crate::subspace::eigen::eig_split;
    use crate::subspace::mssp::mssp;

    fn doppler_estimates(num: &Numerology, targets: Vec<Target>, method: CpMethod) -> Vec<f64> {
        let p = targets.len();
        let y = synthesize_symbol_domain(num, &TargetSet::new(targets), num.n_sc(), num.n_symb()).unwrap();
        let split = eig_split(&doppler_covariance(&y).unwrap(), p, Axis::Doppler).unwrap();
        esprit(&split, num, Some(method)).unwrap()
    }

    #[test]
    fn static_target_rotation_is_one() {
        let num = Numerology::desk();
        let y = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, 0.0)]), 240, 112).unwrap();
        let split = eig_split(&doppler_covariance(&y).unwrap(), 1, Axis::Doppler).unwrap();
        for m in CpMethod::ALL {
            let z = rotation_eigenvalues(&split, &num, Some(m)).unwrap();
            assert!((z[0] - c64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(esprit(&split, &num, Some(m)).unwrap()[0].abs() < 1e-6);
        }
    }

    #[test]
    fn exact_rows_skip_long_cp_hops() {
        let num = Numerology::full_frame();
        let rows = shift_pairs(&num, Axis::Doppler, Some(CpMethod::Exact), 1120).unwrap();
        assert_eq!(rows.len(), 1119 - 20);
        assert!(rows.iter().all(|l| l % 56 != 0));
        let plain = shift_pairs(&num.clone().without_long_cp(), Axis::Doppler, Some(CpMethod::Exact), 1120).unwrap();
        assert_eq!(plain.len(), 1119);
    }

    #[test]
    fn exact_method_is_unbiased_noise_free() {
        let num = Numerology::desk();
        let est = doppler_estimates(&num, vec![Target::unit(10e-9, 11_900.0), Target::unit(40e-9, 12_000.0)], CpMethod::Exact);
        assert!((est[0] - 11_900.0).abs() < 1e-6 && (est[1] - 12_000.0).abs() < 1e-6, "{est:?}");
    }

    #[test]
    fn exact_matches_normal_without_long_cp() {
        let num = Numerology::desk().without_long_cp();
        let t = vec![Target::unit(10e-9, 11_900.0), Target::unit(40e-9, 12_000.0)];
        let a = doppler_estimates(&num, t.clone(), CpMethod::NormalOnly);
        let b = doppler_estimates(&num, t, CpMethod::Exact);
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).abs() <= 1e-6 * x.abs());
        }
    }

    #[test]
    fn delay_estimates_noise_free() {
        let num = Numerology::desk();
        let (t1, t2) = (30e-9, 45e-9);
        let y = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(t1, 0.0), Target::unit(t2, 0.0)]), 240, 112)
            .unwrap();
        let split = eig_split(&delay_covariance(&mssp(&y, 0.4).unwrap()).unwrap(), 2, Axis::Delay).unwrap();
        let est = esprit(&split, &num, None).unwrap();
        assert!((est[0] - t1).abs() < 1e-15 && (est[1] - t2).abs() < 1e-15, "{est:?}");
    }

    #[test]
    fn doppler_needs_method() {
        let num = Numerology::desk();
        let y = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, 0.0)]), 24, 8).unwrap();
        let split = eig_split(&doppler_covariance(&y).unwrap(), 1, Axis::Doppler).unwrap();
        assert!(esprit(&split, &num, None).is_err());
    }

    #[test]
    fn rank_deficient_shift_is_degenerate() {
        let num = Numerology::desk();
        let split = EigenSplit {
            axis: Axis::Delay,
            eigenvalues: vec![1.0, 0.0, 0.0],
            signal_basis: CMat::from_fn(3, 1, |i, _| if i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }),
            noise_basis: CMat::zeros(3, 2),
        };
        assert!(matches!(esprit(&split, &num, None), Err(Error::DegenerateSubspace(_))));
    }
}
