//! Run parameters: material, loading, geometry and study settings.
//!
//! Configuration files are plain text with one `key = value` pair per line;
//! everything after a `#` is a comment. See [`load_config`] for the key list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::fem::QuadratureMode;

/// Isotropic linear-elastic material with Griffith toughness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Young modulus.
    pub young: f64,
    /// Poisson ratio.
    pub poisson: f64,
    /// Specific fracture energy (energy per unit crack area).
    pub gc: f64,
    /// First Lamé modulus, derived.
    pub lambda: f64,
    /// Shear modulus, derived.
    pub mu: f64,
}

impl MaterialParams {
    pub fn new(young: f64, poisson: f64, gc: f64) -> Result<Self> {
        if !(young > 0.0) || !young.is_finite() {
            return Err(Error::config("material.E", format!("E must be positive, got {young}")));
        }
        if !(poisson > 0.0 && poisson < 0.5) {
            return Err(Error::config(
                "material.nu",
                format!("nu out of range (0, 0.5): {poisson}"),
            ));
        }
        if !(gc > 0.0) || !gc.is_finite() {
            return Err(Error::config("material.Gc", format!("Gc must be positive, got {gc}")));
        }
        Ok(MaterialParams {
            young,
            poisson,
            gc,
            lambda: young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)),
            mu: young / (2.0 * (1.0 + poisson)),
        })
    }

    pub fn with_gc(&self, gc: f64) -> Result<Self> {
        MaterialParams::new(self.young, self.poisson, gc)
    }

    /// Plane-strain modulus factor (1 − ν²)/E.
    pub fn plane_strain_compliance(&self) -> f64 {
        (1.0 - self.poisson * self.poisson) / self.young
    }
}

/// Center-crack panel under remote equibiaxial tension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Remote equibiaxial stress.
    pub sigma0: f64,
    /// Crack half-length `a`.
    pub a: f64,
    /// Side of the square domain.
    pub d: f64,
    pub material: MaterialParams,
}

impl ProblemParams {
    /// `crack_length` is the full length `2a`. A zero crack length gives the
    /// uncracked panel.
    pub fn new(sigma0: f64, crack_length: f64, d: f64, material: MaterialParams) -> Result<Self> {
        if !(sigma0 >= 0.0) || !sigma0.is_finite() {
            return Err(Error::config("load.sigma0", format!("sigma0 must be non-negative, got {sigma0}")));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::config("geometry.D", format!("D must be positive, got {d}")));
        }
        if !(crack_length >= 0.0) {
            return Err(Error::config(
                "geometry.crack_length",
                format!("crack length must be non-negative, got {crack_length}"),
            ));
        }
        if crack_length >= d {
            return Err(Error::config(
                "geometry.crack_length",
                format!("crack exceeds domain: 2a = {crack_length} >= D = {d}"),
            ));
        }
        if crack_length > 0.0 && d < 5.0 * crack_length {
            warn!("domain side D = {d} is less than 5 crack lengths (2a = {crack_length}); boundary effects may be significant");
        }
        Ok(ProblemParams {
            sigma0,
            a: 0.5 * crack_length,
            d,
            material,
        })
    }

    /// The panel used throughout the study: E = 1e6, ν = 0.25, σ0 = 10,
    /// 2a = 0.403125, D = 5, with Gc = 5.936506e-5.
    pub fn table1() -> Self {
        let material = MaterialParams::new(1.0e6, 0.25, 5.936506e-5).expect("valid constants");
        ProblemParams::new(10.0, 0.403125, 5.0, material).expect("valid constants")
    }

    pub fn crack_length(&self) -> f64 {
        2.0 * self.a
    }

    /// Same panel without a crack.
    pub fn uncracked(&self) -> Self {
        ProblemParams { a: 0.0, ..*self }
    }

    /// Copy with Gc replaced by the critical value for the current load and crack.
    pub fn with_critical_gc(&self) -> Result<Self> {
        let gc = critical_gc(self.sigma0, self.a, self.material.young, self.material.poisson);
        Ok(ProblemParams {
            material: self.material.with_gc(gc)?,
            ..*self
        })
    }
}

/// Fracture energy at which the applied load is critical for crack extension,
/// `(1 − ν²)/E · K_I²` with `K_I = σ0 √(πa)`.
pub fn critical_gc(sigma0: f64, a: f64, young: f64, poisson: f64) -> f64 {
    debug_assert!(young > 0.0 && poisson > 0.0 && poisson < 0.5);
    let k_i = sigma0 * (std::f64::consts::PI * a).sqrt();
    (1.0 - poisson * poisson) / young * k_i * k_i
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityReport {
    pub gc: f64,
    pub critical_gc: f64,
    /// `|Gc − Gc_crit| / Gc`.
    pub mismatch: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_criticality(params: &ProblemParams, tolerance: f64) -> CriticalityReport {
    let m = &params.material;
    let critical = critical_gc(params.sigma0, params.a, m.young, m.poisson);
    let mismatch = (m.gc - critical).abs() / m.gc;
    CriticalityReport {
        gc: m.gc,
        critical_gc: critical,
        mismatch,
        tolerance,
        pass: mismatch <= tolerance,
    }
}

/// Length parameter selection: closed-form/automatic or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSetting {
    Auto,
    Value(f64),
}

impl fmt::Display for EpsilonSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonSetting::Auto => f.write_str("auto"),
            EpsilonSetting::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Regularization method compared by the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Eigenerosion with the optimal closed-form inelastic energy.
    Ee,
    /// Eigenerosion with Richardson-extrapolated inelastic energy.
    EeRe,
    /// Ambrosio–Tortorelli phase field.
    Pf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ee, Method::EeRe, Method::Pf];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ee => "ee",
            Method::EeRe => "ee-re",
            Method::Pf => "pf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ee" => Ok(Method::Ee),
            "ee-re" => Ok(Method::EeRe),
            "pf" => Ok(Method::Pf),
            other => Err(Error::InvalidInput(format!("unknown method `{other}` (expected ee, ee-re or pf)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EeSettings {
    pub epsilon: EpsilonSetting,
    /// Stiffness multiplier on eroded elements, the `o(ε)` residual. Zero by default.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfSettings {
    /// `None` selects the automatic sweep bracket.
    pub epsilon_list: Option<Vec<f64>>,
    /// Number of points of the automatic sweep.
    pub sweep_points: usize,
    /// Residual stiffness; `None` selects `(ε/D)²`.
    pub eta: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub pin_crack_nodes: bool,
}

/// Limit potential that study errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Exact minimum of the bounded domain under the applied tractions.
    Domain,
    /// Infinite-plate closed form `−W0·D² − (1 − ν²)πa²σ0²/E`.
    ClosedForm,
}

impl Reference {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reference::Domain => "domain",
            Reference::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "domain" => Ok(Reference::Domain),
            "closed-form" => Ok(Reference::ClosedForm),
            other => Err(Error::InvalidInput(format!(
                "unknown reference `{other}` (expected domain or closed-form)"
            ))),
        }
    }
}

/// Everything needed to run a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemParams,
    pub h_over_d: Vec<f64>,
    pub methods: Vec<Method>,
    pub reference: Reference,
    pub ee: EeSettings,
    pub pf: PfSettings,
    pub quadrature: QuadratureMode,
    pub criticality_tol: f64,
    pub output_dir: PathBuf,
}

/// Mesh sequence of the study. The finest level (h/D = 0.00125, about 1.3M
/// displacement unknowns) is left out of the default.
pub const DEFAULT_H_OVER_D: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];

impl StudyConfig {
    pub fn table1() -> Self {
        StudyConfig {
            problem: ProblemParams::table1()
                .with_critical_gc()
                .expect("table parameters are valid"),
            h_over_d: DEFAULT_H_OVER_D.to_vec(),
            methods: Method::ALL.to_vec(),
            reference: Reference::Domain,
            ee: EeSettings {
                epsilon: EpsilonSetting::Auto,
                residual: 0.0,
            },
            pf: PfSettings {
                epsilon_list: None,
                sweep_points: 12,
                eta: None,
                tol: 1e-10,
                max_iters: 200,
                pin_crack_nodes: false,
            },
            quadrature: QuadratureMode::Reference,
            criticality_tol: 1e-4,
            output_dir: PathBuf::from("results"),
        }
    }

    pub fn runs(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }

    pub fn criticality(&self) -> CriticalityReport {
        check_criticality(&self.problem, self.criticality_tol)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "material.E",
    "material.nu",
    "material.Gc",
    "material.derive_critical",
    "load.sigma0",
    "geometry.D",
    "geometry.crack_length",
    "mesh.h_over_D",
    "study.methods",
    "study.reference",
    "ee.epsilon",
    "ee.residual",
    "pf.epsilon_list",
    "pf.sweep_points",
    "pf.eta",
    "pf.tol",
    "pf.max_iters",
    "pf.pin_crack_nodes",
    "quadrature.mode",
    "criticality.tol",
    "output.dir",
];

/// Reads a configuration file. Mandatory keys: `material.E`, `material.nu`,
/// `load.sigma0`, `geometry.D`, `geometry.crack_length`, and either
/// `material.Gc` or `material.derive_critical = true`. Every other key falls
/// back to the [`StudyConfig::table1`] default.
pub fn load_config(path: impl AsRef<Path>) -> Result<StudyConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}

/// Parses configuration text; `origin` is only used in error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<StudyConfig> {
    let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(parse_err(format!("unknown key `{key}`")));
        }
        if entries.insert(key, value).is_some() {
            return Err(parse_err(format!("duplicate key `{key}`")));
        }
    }
    Entries(entries).into_config()
}

struct Entries<'a>(BTreeMap<&'a str, &'a str>);

impl Entries<'_> {
    fn required(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .copied()
            .ok_or_else(|| Error::config(key, "missing mandatory key"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.0.get(key).map(|v| parse_number(key, v)).transpose()
    }

    fn required_number(&self, key: &str) -> Result<f64> {
        parse_number(key, self.required(key)?)
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        self.0
            .get(key)
            .map(|v| match *v {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::config(key, format!("expected true or false, got `{other}`"))),
            })
            .transpose()
    }

    fn number_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_number(key, s))
                    .collect()
            })
            .transpose()
    }

    fn into_config(self) -> Result<StudyConfig> {
        let defaults = StudyConfig::table1();

        let young = self.required_number("material.E")?;
        let poisson = self.required_number("material.nu")?;
        let sigma0 = self.required_number("load.sigma0")?;
        let d = self.required_number("geometry.D")?;
        let crack_length = self.required_number("geometry.crack_length")?;
        let derive = self.boolean("material.derive_critical")?.unwrap_or(false);
        let explicit_gc = self.number("material.Gc")?;

        let gc = match (explicit_gc, derive) {
            (Some(_), true) => {
                return Err(Error::config(
                    "material.Gc",
                    "give either material.Gc or material.derive_critical = true, not both",
                ))
            }
            (Some(gc), false) => gc,
            (None, true) => critical_gc(sigma0, 0.5 * crack_length, young, poisson),
            (None, false) => return Err(Error::config("material.Gc", "missing mandatory key")),
        };
        // Validate E and ν before a derived Gc can mask their errors.
        let material = if derive {
            MaterialParams::new(young, poisson, 1.0)?.with_gc(gc)?
        } else {
            MaterialParams::new(young, poisson, gc)?
        };
        let problem = ProblemParams::new(sigma0, crack_length, d, material)?;

        let h_over_d = self.number_list("mesh.h_over_D")?.unwrap_or(defaults.h_over_d);
        for &r in &h_over_d {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::config("mesh.h_over_D", format!("entries must lie in (0, 1], got {r}")));
            }
        }

        let methods = match self.0.get("study.methods") {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Method>().map_err(|e| Error::config("study.methods", e.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None => defaults.methods,
        };

        let reference = match self.0.get("study.reference") {
            None => defaults.reference,
            Some(v) => v.parse().map_err(|e: Error| Error::config("study.reference", e.to_string()))?,
        };

        let ee_epsilon = match self.0.get("ee.epsilon") {
            None | Some(&"auto") => EpsilonSetting::Auto,
            Some(v) => {
                let eps = parse_number("ee.epsilon", v)?;
                if !(eps > 0.0) {
                    return Err(Error::config("ee.epsilon", format!("epsilon must be positive, got {eps}")));
                }
                EpsilonSetting::Value(eps)
            }
        };
        let ee_residual = self.number("ee.residual")?.unwrap_or(defaults.ee.residual);
        if !(ee_residual >= 0.0) {
            return Err(Error::config("ee.residual", "residual must be non-negative"));
        }

        let epsilon_list = match self.0.get("pf.epsilon_list") {
            None | Some(&"auto") => None,
            Some(_) => {
                let list = self.number_list("pf.epsilon_list")?.unwrap_or_default();
                if list.is_empty() || list.iter().any(|&e| !(e > 0.0)) {
                    return Err(Error::config("pf.epsilon_list", "values must be positive"));
                }
                if list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("pf.epsilon_list", "values must be strictly increasing"));
                }
                Some(list)
            }
        };
        let sweep_points = match self.number("pf.sweep_points")? {
            None => defaults.pf.sweep_points,
            Some(n) if n >= 3.0 && n.fract() == 0.0 => n as usize,
            Some(n) => return Err(Error::config("pf.sweep_points", format!("expected an integer >= 3, got {n}"))),
        };
        let eta = match self.0.get("pf.eta") {
            None | Some(&"auto") => None,
            Some(v) => {
                let eta = parse_number("pf.eta", v)?;
                if !(0.0..1.0).contains(&eta) {
                    return Err(Error::config("pf.eta", format!("eta must lie in [0, 1), got {eta}")));
                }
                Some(eta)
            }
        };
        let tol = self.number("pf.tol")?.unwrap_or(defaults.pf.tol);
        if !(tol > 0.0) {
            return Err(Error::config("pf.tol", "tolerance must be positive"));
        }
        let max_iters = match self.number("pf.max_iters")? {
            None => defaults.pf.max_iters,
            Some(n) if n >= 1.0 && n.fract() == 0.0 => n as usize,
            Some(n) => return Err(Error::config("pf.max_iters", format!("expected a positive integer, got {n}"))),
        };
        let pin_crack_nodes = self.boolean("pf.pin_crack_nodes")?.unwrap_or(defaults.pf.pin_crack_nodes);

        let quadrature = match self.0.get("quadrature.mode") {
            None => defaults.quadrature,
            Some(v) => v.parse().map_err(|e: Error| Error::config("quadrature.mode", e.to_string()))?,
        };
        let criticality_tol = self.number("criticality.tol")?.unwrap_or(defaults.criticality_tol);
        let output_dir = self
            .0
            .get("output.dir")
            .map(PathBuf::from)
            .unwrap_or(defaults.output_dir);

        Ok(StudyConfig {
            problem,
            h_over_d,
            methods,
            reference,
            ee: EeSettings {
                epsilon: ee_epsilon,
                residual: ee_residual,
            },
            pf: PfSettings {
                epsilon_list,
                sweep_points,
                eta,
                tol,
                max_iters,
                pin_crack_nodes,
            },
            quadrature,
            criticality_tol,
            output_dir,
        })
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(Error::config(key, format!("expected a finite number, got `{value}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = "\
# center-crack panel
material.E = 1e6
material.nu = 0.25
material.Gc = 5.936506e-5
load.sigma0 = 10
geometry.crack_length = 0.403125   # 2a
geometry.D = 5
";

    fn parse(text: &str) -> Result<StudyConfig> {
        parse_config(text, Path::new("test.conf"))
    }

    #[test]
    fn table1_file_parses() {
        let cfg = parse(TABLE1).unwrap();
        assert_eq!(cfg.problem.material.young, 1e6);
        assert_eq!(cfg.problem.material.gc, 5.936506e-5);
        assert_eq!(cfg.problem.a, 0.2015625);
        assert_eq!(cfg.problem.d, 5.0);
        assert_eq!(cfg.h_over_d, DEFAULT_H_OVER_D.to_vec());
        assert_eq!(cfg.pf.max_iters, 200);
        assert!(!cfg.pf.pin_crack_nodes);
    }

    #[test]
    fn nu_at_incompressible_limit_rejected() {
        let err = parse(&TABLE1.replace("0.25", "0.5")).unwrap_err();
        assert!(err.to_string().contains("nu out of range"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn crack_longer_than_domain_rejected() {
        let err = parse(&TABLE1.replace("0.403125", "6")).unwrap_err();
        assert!(err.to_string().contains("crack exceeds domain"), "{err}");
    }

    #[test]
    fn missing_and_malformed_keys() {
        let err = parse(&TABLE1.replace("load.sigma0 = 10\n", "")).unwrap_err();
        assert!(err.to_string().contains("load.sigma0"), "{err}");
        let err = parse(&TABLE1.replace("= 10", "= ten")).unwrap_err();
        assert!(err.to_string().contains("expected a number"), "{err}");
        let err = parse(&format!("{TABLE1}mesh.h_over_d = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        let err = parse(&TABLE1.replace("material.Gc = 5.936506e-5\n", "")).unwrap_err();
        assert!(err.to_string().contains("material.Gc"), "{err}");
    }

    #[test]
    fn derived_gc_is_exactly_critical() {
        let text = TABLE1.replace("material.Gc = 5.936506e-5", "material.derive_critical = true");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.criticality().mismatch, 0.0);
        assert!((cfg.problem.material.gc - 5.936506e-5).abs() / 5.936506e-5 < 1e-6);
    }

    #[test]
    fn optional_keys() {
        let text = format!(
            "{TABLE1}mesh.h_over_D = 0.02, 0.01\nee.epsilon = 0.1\npf.epsilon_list = 0.01,0.02,0.04\n\
             pf.eta = 0\npf.pin_crack_nodes = true\nquadrature.mode = fast\nstudy.methods = ee, pf\noutput.dir = out\n\
             study.reference = closed-form\n"
        );
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.h_over_d, vec![0.02, 0.01]);
        assert_eq!(cfg.ee.epsilon, EpsilonSetting::Value(0.1));
        assert_eq!(cfg.pf.epsilon_list, Some(vec![0.01, 0.02, 0.04]));
        assert_eq!(cfg.pf.eta, Some(0.0));
        assert!(cfg.pf.pin_crack_nodes);
        assert_eq!(cfg.quadrature, QuadratureMode::Fast);
        assert_eq!(cfg.methods, vec![Method::Ee, Method::Pf]);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.reference, Reference::ClosedForm);
        assert_eq!(StudyConfig::table1().reference, Reference::Domain);
        assert!(parse(&format!("{TABLE1}study.reference = exact\n")).unwrap_err().is_config_error());
    }

    #[test]
    fn critical_gc_matches_table() {
        let gc = critical_gc(10.0, 0.2015625, 1e6, 0.25);
        assert!((gc - 5.936506e-5).abs() / 5.936506e-5 < 1e-6);
        assert_eq!(critical_gc(0.0, 0.2015625, 1e6, 0.25), 0.0);
        let doubled = critical_gc(20.0, 0.2015625, 1e6, 0.25);
        assert!((doubled / gc - 4.0).abs() < 1e-14);
    }

    #[test]
    fn criticality_report() {
        let p = ProblemParams::table1();
        let r = check_criticality(&p, 1e-4);
        assert!(r.pass && r.mismatch < 1e-5, "{r:?}");

        let doubled = ProblemParams {
            material: p.material.with_gc(2.0 * p.material.gc).unwrap(),
            ..p
        };
        assert!(!check_criticality(&doubled, 1e-4).pass);

        let halved = ProblemParams { sigma0: 5.0, ..p };
        let r = check_criticality(&halved, 1e-4);
        assert!(!r.pass);
        assert!((r.mismatch - 0.75).abs() < 1e-5, "{}", r.mismatch);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lame_sum_identity(young in 1e-3f64..1e9, poisson in 1e-3f64..0.499) {
                let m = MaterialParams::new(young, poisson, 1.0).unwrap();
                let expected = young / (2.0 * (1.0 + poisson) * (1.0 - 2.0 * poisson));
                prop_assert!(((m.lambda + m.mu) - expected).abs() <= 1e-14 * expected);
            }

            #[test]
            fn critical_gc_scale_invariance(sigma0 in 0.1f64..100.0, a in 0.01f64..1.0, c in 0.1f64..10.0) {
                let base = critical_gc(sigma0, a, 1e6, 0.25);
                let scaled = critical_gc(c * sigma0, a / (c * c), 1e6, 0.25);
                prop_assert!((base - scaled).abs() <= 1e-13 * base);
            }
        }
    }
}
