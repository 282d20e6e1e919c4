//! The model zoo, by name, plus kernel documents read from disk.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavechain::io::kernel_from_json;
use wavechain::models::{
    binary_cycling_system, circle_kernel, cyclic_to_random_system, deck_reversal_system, four_point_example,
    lazy_circle_kernel, periodic_class_example, random_regular_graph_walk, sticky_permutation_system,
};
use wavechain::{MarkovKernel, Permutation, WaveSystem};

use crate::config::Bijection;
use crate::error::CliError;

pub const MODELS: [&str; 9] = [
    "circle",
    "lazy-circle",
    "binary-cycling",
    "four-point",
    "deck-reversal",
    "cyclic-to-random",
    "sticky",
    "periodic-classes",
    "random-regular",
];

/// What the bound checks need to know beyond the system itself.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Circle { n: usize, eps: f64, lazy: bool },
    Sticky { q: MarkovKernel, rho: usize, delta: f64 },
    Other,
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub name: String,
    pub system: WaveSystem,
    pub kind: ModelKind,
    /// Display form of the bijection in use.
    pub bijection: String,
}

/// Parameter names and defaults per model; the first entry is the size parameter.
fn defaults(model: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match model {
        "circle" | "lazy-circle" => &[("n", 5.0), ("eps", 1.0)],
        "binary-cycling" => &[("bits", 3.0)],
        "four-point" => &[],
        "deck-reversal" | "cyclic-to-random" => &[("n", 4.0)],
        "sticky" => &[("n", 4.0), ("rho", 0.0), ("delta", 0.05)],
        "periodic-classes" => &[("size", 2.0), ("k", 3.0)],
        "random-regular" => &[("n", 10.0), ("r", 4.0), ("graph_seed", 0.0)],
        _ => return None,
    })
}

/// Name of the parameter a scaling sweep varies.
pub fn size_param(model: &str) -> Option<&'static str> {
    defaults(model).and_then(|d| d.first()).map(|(k, _)| *k)
}

pub fn is_file_model(model: &str) -> bool {
    defaults(model).is_none() && (model.contains('/') || model.ends_with(".json") || Path::new(model).is_file())
}

struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    fn resolve(model: &str, given: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let spec = defaults(model).unwrap_or(&[]);
        let mut values: BTreeMap<String, f64> = spec.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in given {
            if !values.contains_key(k) {
                let known: Vec<_> = spec.iter().map(|(k, _)| *k).collect();
                return Err(CliError::ConfigInvalid(format!(
                    "model '{model}' has no parameter '{k}' (parameters: {})",
                    if known.is_empty() { "none".into() } else { known.join(", ") }
                )));
            }
            values.insert(k.clone(), *v);
        }
        Ok(Self { values })
    }

    fn real(&self, k: &str) -> f64 {
        self.values[k]
    }

    fn count(&self, k: &str) -> Result<usize, CliError> {
        let v = self.values[k];
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(CliError::ConfigInvalid(format!("parameter '{k}' must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    }
}

/// `x -> x + s mod n` when `g` is a rotation, with `s` in `(-n/2, n/2]`.
pub fn rotation_amount(g: &Permutation) -> Option<i64> {
    let n = g.len() as i64;
    let s = g.apply(0) as i64;
    let rotation = (0..g.len()).all(|x| g.apply(x) as i64 == (x as i64 + s).rem_euclid(n));
    rotation.then(|| if 2 * s > n { s - n } else { s })
}

pub fn random_bijection(n: usize, seed: u64) -> Permutation {
    let mut forward: Vec<usize> = (0..n).collect();
    forward.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Permutation::new(forward).expect("a shuffle is a bijection")
}

pub fn describe(g: &Permutation) -> String {
    if g.is_identity() {
        return "identity".into();
    }
    match rotation_amount(g) {
        Some(s) => format!("shift:{s:+}"),
        None => serde_json::to_string(g.forward()).expect("vector serializes"),
    }
}

pub fn resolve_bijection(spec: &Bijection, n: usize) -> Result<Permutation, CliError> {
    match spec {
        Bijection::Explicit(v) => {
            if v.len() != n {
                return Err(CliError::ConfigInvalid(format!("bijection has {} entries for {n} states", v.len())));
            }
            Ok(Permutation::new(v.clone())?)
        }
        Bijection::Named(name) => {
            let bad = || CliError::ConfigInvalid(format!("cannot read bijection '{name}'"));
            if name == "identity" {
                Ok(Permutation::identity(n))
            } else if let Some(s) = name.strip_prefix("shift:") {
                let s: i64 = s.trim().trim_start_matches('+').parse().map_err(|_| bad())?;
                let m = n as i64;
                Ok(Permutation::new((0..n).map(|x| (x as i64 + s).rem_euclid(m) as usize).collect())?)
            } else if let Some(seed) = name.strip_prefix("random:") {
                Ok(random_bijection(n, seed.trim().parse().map_err(|_| bad())?))
            } else if Path::new(name).is_file() {
                let text = std::fs::read_to_string(name).map_err(|source| CliError::Io {
                    path: name.into(),
                    source,
                })?;
                resolve_bijection(&Bijection::Explicit(wavechain::io::permutation_from_json(&text)?.forward().to_vec()), n)
            } else {
                Err(bad())
            }
        }
    }
}

/// Attaches `pi~` when `K~` has a unique invariant measure.
fn with_wave(system: WaveSystem) -> Result<WaveSystem, CliError> {
    match system.clone().with_stationary_wave() {
        Ok(s) => Ok(s),
        Err(wavechain::Error::NotIrreducible) => Ok(system),
        Err(e) => Err(e.into()),
    }
}

pub fn build(
    model: &str,
    params: &BTreeMap<String, f64>,
    bijection: Option<&Bijection>,
) -> Result<BuiltModel, CliError> {
    if is_file_model(model) {
        if !params.is_empty() {
            return Err(CliError::ConfigInvalid("kernel documents take no parameters".into()));
        }
        let text = std::fs::read_to_string(model).map_err(|source| CliError::Io {
            path: model.into(),
            source,
        })?;
        let k = kernel_from_json(&text)?;
        let g = match bijection {
            Some(b) => resolve_bijection(b, k.size())?,
            None => Permutation::identity(k.size()),
        };
        return finish(model, with_wave(WaveSystem::new(k, g)?)?, ModelKind::Other);
    }
    if defaults(model).is_none() {
        return Err(CliError::ModelUnknown {
            name: model.into(),
            known: MODELS.join(", "),
        });
    }
    let p = Params::resolve(model, params)?;
    let rebind = |system: WaveSystem| -> Result<WaveSystem, CliError> {
        match bijection {
            Some(b) => {
                let g = resolve_bijection(b, system.size())?;
                with_wave(WaveSystem::new(system.base().clone(), g)?)
            }
            None => Ok(system),
        }
    };
    let (system, kind) = match model {
        "circle" | "lazy-circle" => {
            let (n, eps) = (p.count("n")?, p.real("eps"));
            let lazy = model == "lazy-circle";
            let k = if lazy { lazy_circle_kernel(n, eps)? } else { circle_kernel(n, eps)?.0 };
            let g = resolve_bijection(bijection.unwrap_or(&Bijection::Named("shift:-1".into())), n)?;
            (with_wave(WaveSystem::new(k, g)?)?, ModelKind::Circle { n, eps, lazy })
        }
        "binary-cycling" => (rebind(binary_cycling_system(p.count("bits")?)?)?, ModelKind::Other),
        "four-point" => (rebind(four_point_example()?)?, ModelKind::Other),
        "deck-reversal" => (rebind(deck_reversal_system(p.count("n")?)?)?, ModelKind::Other),
        "cyclic-to-random" => (rebind(cyclic_to_random_system(p.count("n")?)?)?, ModelKind::Other),
        "sticky" => {
            let sp = sticky_permutation_system(p.count("n")?, p.count("rho")?, p.real("delta"))?;
            let kind = ModelKind::Sticky {
                q: sp.q.clone(),
                rho: sp.rho,
                delta: sp.delta,
            };
            (rebind(sp.system)?, kind)
        }
        "periodic-classes" => (rebind(periodic_class_example(p.count("k")?, p.count("size")?)?)?, ModelKind::Other),
        "random-regular" => {
            let k = random_regular_graph_walk(p.count("n")?, p.count("r")?, p.count("graph_seed")? as u64)?;
            let g = match bijection {
                Some(b) => resolve_bijection(b, k.size())?,
                None => Permutation::identity(k.size()),
            };
            (with_wave(WaveSystem::new(k, g)?)?, ModelKind::Other)
        }
        _ => unreachable!("checked against the defaults table"),
    };
    finish(model, system, kind)
}

fn finish(name: &str, system: WaveSystem, kind: ModelKind) -> Result<BuiltModel, CliError> {
    Ok(BuiltModel {
        name: name.into(),
        bijection: describe(system.map()),
        system,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn every_zoo_model_builds_with_defaults() {
        for name in MODELS {
            let m = build(name, &BTreeMap::new(), None).unwrap();
            assert!(m.system.size() > 0, "{name}");
        }
    }

    #[test]
    fn circle_defaults_to_the_backward_shift() {
        let m = build("circle", &params(&[("n", 7.0)]), None).unwrap();
        assert_eq!(m.bijection, "shift:-1");
        assert_eq!(m.system.map().apply(0), 6);
        assert!(m.system.wave_measure().is_some());
    }

    #[test]
    fn bijections_resolve() {
        assert_eq!(resolve_bijection(&"shift:+2".parse().unwrap(), 5).unwrap().apply(4), 1);
        assert!(resolve_bijection(&"identity".parse().unwrap(), 3).unwrap().is_identity());
        let a = resolve_bijection(&"random:9".parse().unwrap(), 8).unwrap();
        assert_eq!(a, resolve_bijection(&"random:9".parse().unwrap(), 8).unwrap());
        assert!(resolve_bijection(&"[0,0,1]".parse().unwrap(), 3).is_err());
        assert!(resolve_bijection(&"[0,1]".parse().unwrap(), 3).is_err());
        assert!(resolve_bijection(&"twist".parse().unwrap(), 3).is_err());
    }

    #[test]
    fn rotations_are_recognized() {
        assert_eq!(rotation_amount(&Permutation::new(vec![4, 0, 1, 2, 3]).unwrap()), Some(-1));
        assert_eq!(rotation_amount(&Permutation::new(vec![4, 0, 1, 2, 3]).unwrap().inverse()), Some(1));
        assert_eq!(rotation_amount(&Permutation::new(vec![2, 3, 4, 0, 1]).unwrap()), Some(2));
        assert_eq!(rotation_amount(&Permutation::new(vec![1, 0, 2]).unwrap()), None);
        assert_eq!(describe(&Permutation::new(vec![1, 0, 2]).unwrap()), "[1,0,2]");
    }

    #[test]
    fn bad_names_and_parameters() {
        assert!(matches!(build("torus", &BTreeMap::new(), None), Err(CliError::ModelUnknown { .. })));
        assert!(matches!(
            build("circle", &params(&[("m", 3.0)]), None),
            Err(CliError::ConfigInvalid(_))
        ));
        assert!(matches!(
            build("circle", &params(&[("n", 4.5)]), None),
            Err(CliError::ConfigInvalid(_))
        ));
        assert!(matches!(build("circle", &params(&[("n", 4.0)]), None), Err(CliError::Core(_))));
    }

    #[test]
    fn reducible_reductions_carry_no_wave_measure() {
        let m = build("four-point", &BTreeMap::new(), None).unwrap();
        assert!(m.system.wave_measure().is_none());
    }
}
