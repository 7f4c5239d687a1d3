use std::fmt;
use std::path::Path;

use kmlift::error::Error;
use kmlift::geometry::TubePoint;
use kmlift::lattice::{real_basis_map, signature_b2_lattice, LatticeVector, RealBasisMap, SplitLattice};
use kmlift::unfolding::{CoefficientMethod, CuspFormProxy};
use num_complex::Complex64;
use serde::Deserialize;

use crate::cli::{GlobalArgs, IndexArgs, PointArgs};

/// Anything that maps to exit code 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Lib(Error::Signature { .. }) => "parity_obstruction",
            CliError::Lib(_) => "invalid_input",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Scenario file. Every field is optional; flags override it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub b: Option<usize>,
    #[serde(rename = "X")]
    pub x: Option<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Option<Vec<f64>>,
    /// [[re, im], …]
    pub tau: Option<Vec<[f64; 2]>>,
    pub alpha: Option<usize>,
    pub beta: Option<usize>,
    pub lambda: Option<Vec<i64>>,
    pub cusp_form: Option<String>,
    pub method: Option<CoefficientMethod>,
    pub tail_target: Option<f64>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))
    }
}

/// Flags merged over the scenario file.
pub struct Ctx {
    pub scenario: Scenario,
    pub seed: u64,
}

pub const DEFAULT_B: usize = 10;
pub const DEFAULT_SEED: u64 = 1;

impl Ctx {
    pub fn new(global: &GlobalArgs) -> CliResult<Self> {
        let scenario = match &global.config {
            Some(p) => Scenario::load(p)?,
            None => Scenario::default(),
        };
        let seed = global.seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);
        Ok(Ctx { scenario, seed })
    }

    pub fn b(&self, flag: Option<usize>) -> usize {
        flag.or(self.scenario.b).unwrap_or(DEFAULT_B)
    }

    pub fn split(&self, flag: Option<usize>) -> CliResult<(SplitLattice, RealBasisMap)> {
        let split = signature_b2_lattice(self.b(flag))?;
        let g0 = real_basis_map(&split)?;
        Ok((split, g0))
    }

    pub fn point(&self, p: &PointArgs, b: usize) -> CliResult<TubePoint> {
        let base = TubePoint::base(b);
        let x = p.x.clone().or_else(|| self.scenario.x.clone()).unwrap_or(base.x);
        let y = p.y.clone().or_else(|| self.scenario.y.clone()).unwrap_or(base.y);
        if x.len() != b || y.len() != b {
            return usage(format!("X and Y need {b} coordinates, got {} and {}", x.len(), y.len()));
        }
        Ok(TubePoint::new(x, y)?)
    }

    pub fn indices(&self, i: &IndexArgs, default: (usize, usize)) -> (usize, usize) {
        (i.alpha.or(self.scenario.alpha).unwrap_or(default.0), i.beta.or(self.scenario.beta).unwrap_or(default.1))
    }

    pub fn taus(&self, flag: &[Complex64], default: &[Complex64]) -> CliResult<Vec<Complex64>> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        match &self.scenario.tau {
            Some(t) => t
                .iter()
                .map(|&[re, im]| if im > 0.0 { Ok(Complex64::new(re, im)) } else { usage(format!("Im τ must be positive, got {im}")) })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn lambda(&self, flag: &Option<Vec<i64>>, b: usize) -> CliResult<LatticeVector> {
        let v = match flag.clone().or_else(|| self.scenario.lambda.clone()) {
            Some(v) => v,
            None => return usage("--lambda is required"),
        };
        if v.len() != b {
            return usage(format!("λ needs {b} coordinates, got {}", v.len()));
        }
        Ok(LatticeVector::new(v))
    }

    pub fn tail(&self, flag: Option<f64>, default: f64) -> CliResult<f64> {
        let t = flag.or(self.scenario.tail_target).unwrap_or(default);
        if !(t > 0.0) {
            return usage(format!("tail target must be positive, got {t}"));
        }
        Ok(t)
    }

    pub fn method(&self, flag: Option<crate::cli::Method>) -> CoefficientMethod {
        match flag {
            Some(crate::cli::Method::Bessel) => CoefficientMethod::Bessel,
            Some(crate::cli::Method::Quadrature) => CoefficientMethod::Quadrature,
            None => self.scenario.method.unwrap_or(CoefficientMethod::Bessel),
        }
    }

    /// zero | unit:N | path to {"weight": k, "coefficients": [[re, im], …]}.
    /// The built-in forms have weight b/2 + 1.
    pub fn form(&self, flag: &Option<String>, b: usize) -> CliResult<CuspFormProxy> {
        let k = (b / 2 + 1) as i64;
        let spec = flag.clone().or_else(|| self.scenario.cusp_form.clone()).unwrap_or_else(|| "unit:1".into());
        if spec == "zero" {
            return Ok(CuspFormProxy::zero(k));
        }
        if let Some(n) = spec.strip_prefix("unit:") {
            let n: usize = n.parse().map_err(|_| CliError::Usage(format!("--f {spec}: expected unit:N")))?;
            return Ok(CuspFormProxy::unit(k, n)?);
        }
        let s = std::fs::read_to_string(&spec).map_err(|e| CliError::Usage(format!("--f {spec}: {e}")))?;
        let raw: CuspFormProxy = serde_json::from_str(&s).map_err(|e| CliError::Usage(format!("--f {spec}: {e}")))?;
        if raw.weight != k {
            return usage(format!("--f {spec}: weight {} but b = {b} needs {k}", raw.weight));
        }
        Ok(CuspFormProxy::new(raw.weight, raw.coefficients)?)
    }
}
