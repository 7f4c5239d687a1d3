use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "kmlift", version, about = "Theta lifts, unfolded Fourier coefficients and injectivity certificates for even unimodular lattices of signature (b,2)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Format of the report on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the report to FILE; the extension (.json or .csv) picks the format.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Scenario file (JSON); flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and inspect lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Siegel theta functions.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// Tube domain coordinates and the maps ψ.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Kudla–Millson polynomials.
    #[command(subcommand)]
    Poly(PolyCmd),
    /// Fourier coefficients of the unfolded integral.
    #[command(subcommand)]
    Unfold(UnfoldCmd),
    /// Injectivity witnesses.
    #[command(subcommand)]
    Inject(InjectCmd),
    /// Verification suites.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Args, Debug, Clone, Default)]
pub struct BArg {
    /// Lattice rank parameter; L has signature (b, 2).
    #[arg(long)]
    pub b: Option<usize>,
}

/// Z = X + iY in K-coordinates; the base point when omitted.
#[derive(Args, Debug, Clone, Default)]
pub struct PointArgs {
    #[arg(long = "x", value_name = "X", value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long = "y", value_name = "Y", value_delimiter = ',', allow_negative_numbers = true)]
    pub y: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct IndexArgs {
    /// Index α of P_{α,β}, 1-based.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Index β of P_{α,β}, 1-based.
    #[arg(long)]
    pub beta: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum LatticeCmd {
    /// The split lattice K ⊕ U for signature (b, 2).
    Build {
        #[command(flatten)]
        b: BArg,
        /// Which lattice to emit.
        #[arg(long, value_enum, default_value_t = Part::L)]
        part: Part,
    },
    /// Invariants of a lattice file or of the split lattice for b.
    Info {
        #[command(flatten)]
        b: BArg,
        /// Lattice document {"gram": [[...]], "unimodular": bool}.
        #[arg(long, value_name = "FILE")]
        file: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    L,
    K,
    E8,
}

#[derive(Subcommand, Debug)]
pub enum ThetaCmd {
    /// y-independent Θ_L(τ, ψ(Z), P_{α,β}) at one or more τ.
    Eval {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        idx: IndexArgs,
        /// τ as "re,im"; repeatable.
        #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
        tau: Vec<Complex64>,
        /// Use g = 1 instead of ψ(Z).
        #[arg(long)]
        identity: bool,
        #[arg(long)]
        tail: Option<f64>,
    },
    /// Θ(γτ) against the automorphy factor times Θ(τ).
    ModularCheck {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        idx: IndexArgs,
        #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
        tau: Vec<Complex64>,
        /// γ as "a,b,c,d"; repeatable. Defaults to S, T, TS, ST⁻¹.
        #[arg(long, value_parser = parse_sl2, allow_hyphen_values = true)]
        gamma: Vec<[i64; 4]>,
        /// Evaluate at ψ(Z) instead of g = 1.
        #[arg(long)]
        at_point: bool,
        #[arg(long)]
        tail: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        tail_limit: f64,
    },
    /// F_{α,β} against the right-hand side of the splitting.
    SplitCheck {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        idx: IndexArgs,
        /// Random (τ, Z) pairs drawn from the seed.
        #[arg(long, default_value_t = 3)]
        cases: usize,
        #[arg(long, default_value_t = 15)]
        cd_bound: i64,
        #[arg(long, default_value_t = 8)]
        r_bound: i64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum GeometryCmd {
    /// KAN factors of Z and the isometry ψ(Z).
    Kan {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Z + X′ and the w-map comparison for a lattice vector.
    Translate {
        #[command(flatten)]
        point: PointArgs,
        /// X′ in K-coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        xp: Vec<f64>,
        /// λ ∈ K in lattice coordinates; defaults to the first basis vector.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambda: Option<Vec<i64>>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PolyCmd {
    /// Pieces p_{h} of P_{α,β} for an isometry g.
    Decompose {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        idx: IndexArgs,
        /// identity | swap:A | rotation | word:W1;W2;… (exact over Q(√2)).
        #[arg(long, default_value = "identity")]
        isometry: String,
        /// Row-major isometry document {"rows": [[...]]}; decomposed in floating point.
        #[arg(long, value_name = "FILE", conflicts_with = "isometry")]
        isometry_file: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Bessel,
    Quadrature,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Expansion,
    Methods,
    XIndependence,
}

#[derive(Subcommand, Debug)]
pub enum UnfoldCmd {
    /// Fourier coefficient at λ ∈ K.
    Coeff {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        idx: IndexArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambda: Option<Vec<i64>>,
        /// Cusp-form coefficients: zero, unit:N, or a JSON file {"weight": k, "coefficients": [[re, im], …]}.
        #[arg(long = "f")]
        form: Option<String>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Constant term of the defining integral.
    Constant {
        #[command(flatten)]
        b: BArg,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        idx: IndexArgs,
        #[arg(long = "f")]
        form: Option<String>,
        #[arg(long)]
        tail: Option<f64>,
    },
    /// Seeded consistency checks of the coefficient formula.
    Verify {
        #[arg(long, value_enum)]
        scenario: Scenario,
        /// Sample count; the default matches the acceptance size.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// ∫_F Σ_γ h(γτ) dμ against 2Γ(s−1) for h = y^s e^{−y}.
    GenericUnfold {
        /// Repeatable.
        #[arg(long)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 40)]
        coset_bound: i64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum InjectCmd {
    /// Witness (α, β, g) for λ ∈ K with q(λ) > 0.
    Witness {
        #[command(flatten)]
        b: BArg,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        lambda: Vec<i64>,
    },
    /// Certificate for q(λ) = 1..N.
    Certificate {
        #[command(flatten)]
        b: BArg,
        #[arg(long, default_value_t = 100)]
        n: i64,
    },
}

#[derive(Subcommand, Debug)]
pub enum SuiteCmd {
    /// Every verification check at b = 10.
    All {
        #[command(flatten)]
        b: BArg,
        /// Reduced sample counts and truncations.
        #[arg(long, conflicts_with = "full")]
        fast: bool,
        /// Acceptance sizes and tolerances (the default).
        #[arg(long)]
        full: bool,
    },
}

fn parse_tau(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected re,im, got {s:?}"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    if !(im > 0.0) {
        return Err(format!("Im τ must be positive, got {im}"));
    }
    Ok(Complex64::new(re, im))
}

fn parse_sl2(s: &str) -> Result<[i64; 4], String> {
    let v: Vec<i64> = s.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| format!("{e}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] if a * d - b * c == 1 => Ok([a, b, c, d]),
        [_, _, _, _] => Err("determinant must be 1".into()),
        _ => Err(format!("expected a,b,c,d, got {s:?}")),
    }
}
