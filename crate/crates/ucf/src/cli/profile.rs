//! Performance profiles over per-problem solve times.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("no timing data")]
    Empty,
    #[error("model '{0}' has a different number of problems")]
    Ragged(String),
    #[error("model '{model}' has a nonpositive time on problem {problem}")]
    Nonpositive { model: String, problem: usize },
}

/// `ρ_s(τ)` at every breakpoint ratio, per model.
pub type Profile = BTreeMap<String, Vec<(f64, f64)>>;

/// Fraction of problems each model solves within factor `τ` of the fastest.
pub fn performance_profile(times: &BTreeMap<String, Vec<f64>>) -> Result<Profile, ProfileError> {
    let n = times.values().next().map(Vec::len).ok_or(ProfileError::Empty)?;
    if n == 0 {
        return Err(ProfileError::Empty);
    }
    for (model, ts) in times {
        if ts.len() != n {
            return Err(ProfileError::Ragged(model.clone()));
        }
        if let Some(problem) = ts.iter().position(|&t| !(t > 0.0)) {
            return Err(ProfileError::Nonpositive { model: model.clone(), problem });
        }
    }
    let best: Vec<f64> = (0..n).map(|p| times.values().map(|ts| ts[p]).fold(f64::INFINITY, f64::min)).collect();
    let mut out = Profile::new();
    for (model, ts) in times {
        let mut ratios: Vec<f64> = ts.iter().zip(&best).map(|(t, b)| t / b).collect();
        ratios.sort_by(f64::total_cmp);
        let mut curve: Vec<(f64, f64)> = Vec::new();
        for (i, &r) in ratios.iter().enumerate() {
            let rho = (i + 1) as f64 / n as f64;
            match curve.last_mut() {
                Some(last) if last.0 == r => last.1 = rho,
                _ => curve.push((r, rho)),
            }
        }
        out.insert(model.clone(), curve);
    }
    Ok(out)
}

/// `ρ_s(τ)` read off a profile curve.
pub fn rho_at(curve: &[(f64, f64)], tau: f64) -> f64 {
    curve.iter().take_while(|(r, _)| *r <= tau).last().map_or(0.0, |(_, rho)| *rho)
}

/// CSV lines `model,tau,rho`.
pub fn profile_csv(p: &Profile) -> String {
    let mut s = String::from("model,tau,rho\n");
    for (model, curve) in p {
        for (tau, rho) in curve {
            s.push_str(&format!("{model},{tau},{rho}\n"));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, &[f64])]) -> BTreeMap<String, Vec<f64>> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
    }

    #[test]
    fn single_model_is_one_at_one() {
        let p = performance_profile(&map(&[("a", &[3.0, 5.0])])).unwrap();
        assert_eq!(rho_at(&p["a"], 1.0), 1.0);
    }

    #[test]
    fn swapped_times() {
        let p = performance_profile(&map(&[("a", &[1.0, 2.0]), ("b", &[2.0, 1.0])])).unwrap();
        for m in ["a", "b"] {
            assert_eq!(rho_at(&p[m], 1.0), 0.5);
            assert_eq!(rho_at(&p[m], 2.0), 1.0);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(performance_profile(&BTreeMap::new()), Err(ProfileError::Empty));
        assert!(matches!(performance_profile(&map(&[("a", &[1.0, 0.0])])), Err(ProfileError::Nonpositive { .. })));
        assert!(matches!(performance_profile(&map(&[("a", &[1.0]), ("b", &[1.0, 2.0])])), Err(ProfileError::Ragged(_))));
    }

    proptest::proptest! {
        #[test]
        fn nondecreasing_and_reaches_one(ts in proptest::collection::vec(proptest::collection::vec(0.01f64..100.0, 5), 1..4)) {
            let times: BTreeMap<String, Vec<f64>> = ts.into_iter().enumerate().map(|(i, v)| (format!("m{i}"), v)).collect();
            let p = performance_profile(&times).unwrap();
            for curve in p.values() {
                proptest::prop_assert!(curve.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
                proptest::prop_assert_eq!(rho_at(curve, f64::INFINITY), 1.0);
            }
        }
    }
}
