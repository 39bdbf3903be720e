use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{Condenser, Potential};
use crate::lpopt::{PNorm, MAX_DEGREE};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Hermite,
    PlanarGauss,
    QuarticTwoCut,
    ChebyshevUnweighted,
    Custom,
}

impl ScenarioName {
    pub const PRESETS: [ScenarioName; 4] = [
        ScenarioName::Hermite,
        ScenarioName::PlanarGauss,
        ScenarioName::QuarticTwoCut,
        ScenarioName::ChebyshevUnweighted,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::invalid(format!("unknown scenario {s:?}")))
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub equilibrium: f64,
    pub irls: f64,
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equilibrium: 1e-7,
            irls: 1e-10,
            root: 1e-12,
        }
    }
}

/// Which checks enter the pass/fail matrix, with their thresholds. `None`
/// disables a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// `|-(1/n) ln ||P_n w^n||_p - F_w|` at the largest n.
    pub norm_limit: Option<f64>,
    /// Spread over p of `-(1/n) ln ||P_n w^n||_p` at the largest n.
    pub p_spread: Option<f64>,
    /// `min_n ratio n^{d/p}` relative to its value at the smallest n.
    pub ratio_floor: Option<f64>,
    /// Roots outside the hull fattening: non-increasing, zero at the end.
    pub localization: bool,
    pub max_per_gap: Option<usize>,
    /// `|f_n|` at the largest n.
    pub f_n_final: Option<f64>,
    pub f_n_monotone: bool,
    /// `|f_n|` at every n.
    pub f_n_all: Option<f64>,
    pub balayage_final: Option<f64>,
    pub balayage_monotone: bool,
    pub balayage_all: Option<f64>,
    pub restriction: bool,
    pub root_residual: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            norm_limit: Some(0.1),
            p_spread: Some(0.05),
            ratio_floor: Some(0.1),
            localization: true,
            max_per_gap: None,
            f_n_final: Some(0.1),
            f_n_monotone: false,
            f_n_all: None,
            balayage_final: None,
            balayage_monotone: false,
            balayage_all: None,
            restriction: true,
            root_residual: Some(1e-8),
        }
    }
}

/// Fully expanded run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub potential: Potential,
    pub condenser: Condenser,
    pub p: Vec<PNorm>,
    pub n: Vec<usize>,
    /// Nodes per unit length of the polynomial grids.
    pub resolution: f64,
    /// Nodes per unit length of the equilibrium grid.
    pub equilibrium_resolution: f64,
    /// Degree used for the truncation of the equilibrium grid.
    pub equilibrium_n: usize,
    pub tolerances: Tolerances,
    pub eps: f64,
    pub fattening: f64,
    pub test_points: Vec<C64>,
    pub j_max: usize,
    pub admissibility_threshold: f64,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub out_roots_csv: Option<PathBuf>,
}

/// On-disk form. Only `scenario` is required; presets fill the rest.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<ScenarioName>,
    potential: Option<Potential>,
    condenser: Option<Condenser>,
    p: Option<Vec<PNorm>>,
    n: Option<Vec<usize>>,
    resolution: Option<f64>,
    equilibrium_resolution: Option<f64>,
    equilibrium_n: Option<usize>,
    tolerances: Option<Tolerances>,
    eps: Option<f64>,
    fattening: Option<f64>,
    test_points: Option<Vec<C64>>,
    j_max: Option<usize>,
    admissibility_threshold: Option<f64>,
    seed: Option<u64>,
    thresholds: Option<Thresholds>,
    out_json: Option<PathBuf>,
    out_csv: Option<PathBuf>,
    out_roots_csv: Option<PathBuf>,
}

fn pts(v: &[(f64, f64)]) -> Vec<C64> {
    v.iter().map(|&(a, b)| C64::new(a, b)).collect()
}

fn ps(v: &[f64]) -> Vec<PNorm> {
    v.iter().map(|&p| PNorm::new(p).expect("preset p")).collect()
}

impl ScenarioConfig {
    /// Preset configuration; `Custom` yields generic defaults with an
    /// unweighted unit interval.
    pub fn preset(name: ScenarioName) -> Self {
        let inf = f64::INFINITY;
        let mut c = ScenarioConfig {
            scenario: name,
            potential: Potential::zero(),
            condenser: Condenser::interval(-1.0, 1.0),
            p: ps(&[2.0]),
            n: vec![10, 20],
            resolution: 32.0,
            equilibrium_resolution: 64.0,
            equilibrium_n: 0,
            tolerances: Tolerances::default(),
            eps: 0.1,
            fattening: 0.2,
            test_points: Vec::new(),
            j_max: 6,
            admissibility_threshold: crate::domain::DEFAULT_MARGIN,
            seed: 0,
            thresholds: Thresholds::default(),
            out_json: None,
            out_csv: None,
            out_roots_csv: None,
        };
        match name {
            ScenarioName::Hermite => {
                c.potential = Potential::quadratic(0.5);
                c.condenser = Condenser::real_line();
                c.p = ps(&[1.0, 2.0, 4.0, inf]);
                c.n = vec![10, 20, 30, 40];
                c.equilibrium_resolution = 122.75;
                c.test_points = pts(&[(3.0, 0.0), (2.0, 2.0), (-4.0, 0.0)]);
                c.thresholds.f_n_monotone = true;
                c.thresholds.balayage_final = Some(0.05);
                c.thresholds.balayage_monotone = true;
            }
            ScenarioName::PlanarGauss => {
                c.potential = Potential::radial_quadratic(1.0);
                c.condenser = Condenser::Plane {};
                c.n = vec![5, 10, 15, 20, 25, 30];
                c.equilibrium_resolution = 25.0;
                c.fattening = 0.3;
                c.test_points = pts(&[(2.0, 0.0), (0.0, 1.5), (-1.0, -1.0), (1.2, 1.2)]);
                c.thresholds.f_n_all = Some(2e-3);
                c.thresholds.balayage_all = Some(1e-10);
            }
            ScenarioName::QuarticTwoCut => {
                c.potential = Potential::quartic(0.25, -1.5);
                c.condenser = Condenser::real_line();
                c.n = vec![10, 20, 30, 40];
                c.resolution = 64.0;
                c.test_points = pts(&[(3.5, 0.0), (0.0, 2.0), (-4.0, 1.0)]);
                c.thresholds.max_per_gap = Some(1);
            }
            ScenarioName::ChebyshevUnweighted => {
                c.p = ps(&[inf]);
                c.n = vec![10];
                c.resolution = 1024.0;
                c.equilibrium_resolution = 256.0;
                c.fattening = 0.1;
                c.test_points = pts(&[(2.0, 0.0), (0.0, 1.0), (-3.0, 0.5)]);
            }
            ScenarioName::Custom => {}
        }
        c.equilibrium_n = c.n.first().copied().unwrap_or(0);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config { path: String::from("."), message: m });
        self.potential.validate()?;
        self.condenser.validate()?;
        if self.p.is_empty() {
            return bad("p list is empty".into());
        }
        if self.n.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("n list {:?} is not strictly increasing", self.n));
        }
        if let Some(n) = self.n.iter().find(|&&n| n == 0 || n > MAX_DEGREE) {
            return bad(format!("degree {n} outside 1..={MAX_DEGREE}"));
        }
        for (k, v) in [
            ("resolution", self.resolution),
            ("equilibrium_resolution", self.equilibrium_resolution),
        ] {
            if !(v >= 8.0 && v.is_finite()) {
                return bad(format!("{k} must be at least 8, got {v}"));
            }
        }
        for (k, v) in [
            ("eps", self.eps),
            ("fattening", self.fattening),
            ("tolerances.equilibrium", self.tolerances.equilibrium),
            ("tolerances.irls", self.tolerances.irls),
            ("tolerances.root", self.tolerances.root),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{k} must be positive, got {v}"));
            }
        }
        if self.j_max == 0 {
            return bad("j_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        expand(raw)
    }
}

fn expand(raw: RawConfig) -> Result<ScenarioConfig> {
    let missing = |k: &str| Error::Config {
        path: k.to_string(),
        message: "missing required key".into(),
    };
    let name = raw.scenario.ok_or_else(|| missing("scenario"))?;
    let mut c = ScenarioConfig::preset(name);
    if name == ScenarioName::Custom {
        c.potential = raw.potential.ok_or_else(|| missing("potential"))?;
        c.condenser = raw.condenser.ok_or_else(|| missing("condenser"))?;
    } else if raw.potential.is_some() || raw.condenser.is_some() {
        return Err(Error::Config {
            path: if raw.potential.is_some() { "potential" } else { "condenser" }.into(),
            message: format!("preset {name} fixes the potential and condenser; use \"custom\""),
        });
    }
    if let Some(v) = raw.p {
        c.p = v;
    }
    let n_given = raw.n.is_some();
    if let Some(v) = raw.n {
        c.n = v;
    }
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = raw.$f { c.$f = v; } )* };
    }
    take!(resolution, equilibrium_resolution, tolerances, eps, fattening, test_points, j_max,
          admissibility_threshold, seed, thresholds);
    c.equilibrium_n = match raw.equilibrium_n {
        Some(v) => v,
        None if n_given => c.n.first().copied().unwrap_or(0),
        None => c.equilibrium_n,
    };
    c.out_json = raw.out_json;
    c.out_csv = raw.out_csv;
    c.out_roots_csv = raw.out_roots_csv;
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_expansion() {
        let c = ScenarioConfig::from_json_str(r#"{"scenario":"hermite","p":[2],"n":[10,20]}"#).unwrap();
        assert_eq!(c.potential, Potential::quadratic(0.5));
        assert_eq!(c.condenser, Condenser::real_line());
        assert_eq!(c.p, vec![PNorm::Finite(2.0)]);
        assert_eq!(c.equilibrium_n, 10);
    }

    #[test]
    fn custom_needs_potential() {
        let e = ScenarioConfig::from_json_str(r#"{"scenario":"custom"}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref path, .. } if path == "potential"), "{e}");
    }

    #[test]
    fn inf_token() {
        let c = ScenarioConfig::from_json_str(r#"{"scenario":"planar_gauss","p":["inf"],"n":[5]}"#).unwrap();
        assert_eq!(c.p, vec![PNorm::Inf]);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            r#"{"scenario":"hermite","p":[0.5]}"#,
            r#"{"scenario":"hermite","n":[20,10]}"#,
            r#"{"scenario":"hermite","bogus":1}"#,
            r#"{"scenario":"hermite","tolerances":{"root":1e-9,"extra":2}}"#,
            r#"{"scenario":"hermite","potential":{"kind":"zero"}}"#,
            r#"{"scenario":"nope"}"#,
        ] {
            assert!(ScenarioConfig::from_json_str(text).is_err(), "{text}");
        }
        let e = ScenarioConfig::from_json_str(r#"{"scenario":"hermite","tolerances":{"root":"x"}}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref path, .. } if path == "tolerances.root"), "{e}");
    }

    #[test]
    fn custom_round_trip() {
        let text = r#"{"scenario":"custom","potential":{"kind":"polynomial","terms":[[2,0,1.0]]},
                       "condenser":{"kind":"intervals","intervals":[["-inf","inf"]]},"p":[2,"inf"],"n":[4,8]}"#;
        let c = ScenarioConfig::from_json_str(text).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
