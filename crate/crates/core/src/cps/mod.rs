//! Cut-and-project realization for 1D Pisot-unit systems: the internal space is spanned by the
//! non-chosen conjugate embeddings of Q(λ).

mod export;
mod sandwich;
mod window;

pub use export::{windows_to_csv, windows_to_json, windows_to_svg};

pub use sandwich::{lattice_points, verify_sandwich, SandwichReport, Violation};
pub use window::{
    estimate_window, estimate_windows, WindowEstimate, WINDOW_CELLS_COARSE, WINDOW_CELLS_FINE,
};

use nalgebra::Complex;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ring::RingElement;
use crate::system::SubstitutionSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CpsError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("colour '{0}' has no points in the patch")]
    EmptyColour(String),
}

/// A conjugate root with its certified error radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub re: f64,
    pub im: f64,
    pub error: f64,
}

impl Conjugate {
    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }
}

/// ψ: Q(λ) → ℝ^{n−1}. Real conjugates give one coordinate, complex pairs give Re and Im.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarMap {
    pub conjugates: Vec<Conjugate>,
    pub lambda: f64,
}

impl StarMap {
    pub fn internal_dimension(&self) -> usize {
        self.conjugates
            .iter()
            .map(|c| if c.is_real() { 1 } else { 2 })
            .sum()
    }

    pub fn apply(&self, x: &RingElement) -> Vec<f64> {
        let coords: Vec<f64> = x
            .coords()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        let mut out = Vec::with_capacity(self.internal_dimension());
        for c in &self.conjugates {
            let z = Complex::new(c.re, c.im);
            let mut acc = Complex::new(0.0, 0.0);
            let mut power = Complex::new(1.0, 0.0);
            for &k in &coords {
                acc += power * k;
                power *= z;
            }
            out.push(acc.re);
            if !c.is_real() {
                out.push(acc.im);
            }
        }
        out
    }

    /// ψ applied coordinatewise to a 1D point.
    pub fn apply_point(&self, p: &[RingElement]) -> Vec<f64> {
        self.apply(&p[0])
    }
}

/// Builds ψ when λ is a Pisot unit; anything else is `Unsupported`.
pub fn build_star_map(spec: &SubstitutionSpec) -> Result<StarMap, CpsError> {
    if spec.dimension != 1 {
        return Err(CpsError::Unsupported(
            "internal spaces are only realized in dimension 1".into(),
        ));
    }
    let Some(mp) = spec.ring.minpoly() else {
        return Err(CpsError::Unsupported(
            "λ is rational, hence not a unit with λ > 1".into(),
        ));
    };
    let poly = mp.poly();
    if poly.degree() < 2 {
        return Err(CpsError::Unsupported(format!(
            "λ = {} is an integer > 1, not a unit",
            spec.ring.lambda_f64().unwrap_or(f64::NAN)
        )));
    }
    let constant = poly.coeffs()[0].to_i64().unwrap_or(0);
    if constant.abs() != 1 {
        return Err(CpsError::Unsupported(format!(
            "λ is not an algebraic unit (constant term {})",
            poly.coeffs()[0]
        )));
    }
    let lambda = spec.ring.lambda_f64().expect("algebraic");
    let deriv = poly.derivative();
    let n = poly.degree() as f64;
    let mut roots = poly.complex_roots();
    let chosen = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - lambda).norm().total_cmp(&(b.1 - lambda).norm()))
        .map(|(k, _)| k)
        .expect("degree ≥ 2");
    roots.remove(chosen);
    let mut conjugates = Vec::new();
    for z in roots {
        let error = n * (poly.eval_complex(z) / deriv.eval_complex(z)).norm();
        if z.norm() + error >= 1.0 {
            return Err(CpsError::Unsupported(format!(
                "λ is not Pisot: conjugate of modulus {:.6}",
                z.norm()
            )));
        }
        if z.im.abs() <= error.max(1e-12) {
            conjugates.push(Conjugate {
                re: z.re,
                im: 0.0,
                error,
            });
        } else if z.im > 0.0 {
            conjugates.push(Conjugate {
                re: z.re,
                im: z.im,
                error,
            });
        }
    }
    conjugates.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(StarMap { conjugates, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::word_to_spec;
    use crate::Execution;

    #[test]
    fn fibonacci_conjugate() {
        let spec = word_to_spec(&["ab", "a"]).unwrap();
        let star = build_star_map(&spec).unwrap();
        assert_eq!(star.internal_dimension(), 1);
        let c = &star.conjugates[0];
        assert!(c.re > -0.62 && c.re < -0.61 && c.is_real());
        let l = spec.ring.generator().unwrap();
        let a = &l * &l;
        let b = &l + &spec.ring.one();
        assert!((star.apply(&a)[0] - star.apply(&b)[0]).abs() < 1e-12);
    }

    #[test]
    fn tribonacci_has_complex_pair() {
        let spec = word_to_spec(&["ab", "ac", "a"]).unwrap();
        let star = build_star_map(&spec).unwrap();
        assert_eq!(star.conjugates.len(), 1);
        assert_eq!(star.internal_dimension(), 2);
    }

    #[test]
    fn non_units_are_unsupported() {
        for words in [
            vec!["aa"],
            vec!["ab", "ba"],
            vec!["ab", "aa"],
            vec!["abbb", "a"],
        ] {
            let spec = word_to_spec(&words).unwrap();
            assert!(
                matches!(build_star_map(&spec), Err(CpsError::Unsupported(_))),
                "{words:?}"
            );
        }
    }

    fn sandwich_for(
        words: &[&str],
        radius: f64,
        eps: f64,
    ) -> (Vec<WindowEstimate>, SandwichReport) {
        use crate::system::solve_adjoint;
        use crate::tiling::{find_seed, generate_patch};
        let spec = word_to_spec(words).unwrap();
        let geom = solve_adjoint(&spec).unwrap();
        let seed = find_seed(&spec, &geom, 8).unwrap();
        let patch = generate_patch(&spec, &geom, &seed, 200.0).unwrap();
        let star = build_star_map(&spec).unwrap();
        let windows: Vec<WindowEstimate> =
            estimate_windows(&star, &patch, &seed.fixed_point, Execution::Sequential)
                .into_iter()
                .collect::<Result<_, _>>()
                .unwrap();
        let report =
            verify_sandwich(&star, &patch, &seed.fixed_point, &windows, radius, eps).unwrap();
        (windows, report)
    }

    #[test]
    fn fibonacci_sandwich_holds() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (windows, report) = sandwich_for(&["ab", "a"], phi.powi(8), 0.05);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.lattice_points > 0 && report.members_checked > 0);
        // The windows have lengths 1 and 1/φ.
        assert!(windows.iter().all(|w| !w.inner.is_empty()));
        let total: f64 = windows.iter().map(|w| w.outer_volume()).sum();
        assert!(total > phi && total < phi + 0.2, "{total}");
    }

    #[test]
    fn tribonacci_sandwich_holds() {
        let (_, report) = sandwich_for(&["ab", "ac", "a"], 30.0, 0.05);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }
}
