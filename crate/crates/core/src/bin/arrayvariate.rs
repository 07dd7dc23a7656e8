//! Command-line front end: sampling, density evaluation, multilinear least
//! squares, Monte Carlo verification and radial pdf tables.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or format error,
//! 3 numerical error (singular or rank-deficient factor).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arrayvariate::densities::radial_pdf;
use arrayvariate::format::{fmt_real, read_array, read_arrays, read_matrix, write_array, write_arrays};
use arrayvariate::sampling::{sample_elliptical, RandomStream};
use arrayvariate::verify::verify_model;
use arrayvariate::{
    multilinear_lstsq, DataArray, DenseMatrix, Error, FactorList, Kernel, KroneckerModel, ModeMaps,
    Shape,
};

const MIN_VERIFY_N: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "arrayvariate", version, about = "Array-variate distributions with Kronecker-structured scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw arrays from the model and write them as concatenated ARRV1 records.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one log-density per input array.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        /// ARRV1 files; each may hold several arrays.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multilinear least squares: apply the l-inverse of every mode map to the input.
    Lstsq {
        /// MATV1 mode maps in mode order.
        #[arg(long, required = true)]
        factor: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo checks for the model.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the radial pdf on `0, rmax/steps, ..., rmax`.
    Radial {
        #[command(flatten)]
        model: ModelArgs,
        /// Dimension k; defaults to the size implied by --factor/--mean.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KernelName {
    Normal,
    T,
    Cauchy,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = KernelName::Normal)]
    kernel: KernelName,
    /// Degrees of freedom; required with `--kernel t`.
    #[arg(long)]
    df: Option<f64>,
    /// MATV1 factor files in mode order.
    #[arg(long)]
    factor: Vec<PathBuf>,
    /// ARRV1 location array; defaults to zeros.
    #[arg(long)]
    mean: Option<PathBuf>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }

    fn from_lib(err: Error, context: Option<&Path>) -> Self {
        let code = match err {
            Error::Singular { .. } | Error::Numeric(_) => 3,
            _ => 2,
        };
        let msg = match (&err, context) {
            (Error::Parse { line, msg }, Some(p)) => format!("{}:{line}: {msg}", p.display()),
            (_, Some(p)) => format!("{}: {err}", p.display()),
            (_, None) => err.to_string(),
        };
        Failure { code, msg }
    }
}

type CliResult<T> = Result<T, Failure>;

fn lib<T>(r: arrayvariate::Result<T>) -> CliResult<T> {
    r.map_err(|e| Failure::from_lib(e, None))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> CliResult<DenseMatrix> {
    read_matrix(&read_file(path)?).map_err(|e| Failure::from_lib(e, Some(path)))
}

fn load_array(path: &Path) -> CliResult<DataArray> {
    read_array(&read_file(path)?).map_err(|e| Failure::from_lib(e, Some(path)))
}

impl ModelArgs {
    fn kernel(&self) -> CliResult<Kernel> {
        match (self.kernel, self.df) {
            (KernelName::T, Some(v)) => lib(Kernel::student_t(v)),
            (KernelName::T, None) => Err(Failure::usage("--kernel t requires --df")),
            (_, Some(_)) => Err(Failure::usage("--df is only valid with --kernel t")),
            (KernelName::Normal, None) => Ok(Kernel::Normal),
            (KernelName::Cauchy, None) => Ok(Kernel::Cauchy),
        }
    }

    fn model(&self) -> CliResult<KroneckerModel> {
        let kernel = self.kernel()?;
        if self.factor.is_empty() {
            return Err(Failure::usage("at least one --factor is required"));
        }
        let factors = self
            .factor
            .iter()
            .map(|p| load_matrix(p))
            .collect::<CliResult<Vec<_>>>()?;
        for (p, a) in self.factor.iter().zip(&factors) {
            if !a.is_square() {
                return Err(Failure::usage(format!(
                    "{}: factor must be square, got {}x{}",
                    p.display(),
                    a.rows(),
                    a.cols()
                )));
            }
        }
        let factors = lib(FactorList::new(factors))?;
        let mean = match &self.mean {
            Some(p) => {
                let m = load_array(p)?;
                if m.shape().order() != factors.len() {
                    return Err(Failure::usage(format!(
                        "{}: mean has order {}, but {} factors were given",
                        p.display(),
                        m.shape().order(),
                        factors.len()
                    )));
                }
                m
            }
            None => DataArray::zeros(lib(Shape::new(factors.row_dims()))?),
        };
        lib(KroneckerModel::new(mean, factors, kernel))
    }

    /// Size implied by --factor or --mean, when either is given.
    fn implied_dim(&self) -> CliResult<Option<usize>> {
        if let Some(p) = &self.mean {
            return Ok(Some(load_array(p)?.len()));
        }
        if self.factor.is_empty() {
            return Ok(None);
        }
        let mut m = 1;
        for p in &self.factor {
            m *= load_matrix(p)?.rows();
        }
        Ok(Some(m))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

fn cmd_sample(model: &ModelArgs, n: usize, seed: u64, out: Option<&Path>) -> CliResult<u8> {
    let model = model.model()?;
    let draws = lib(sample_elliptical(&model, n, &mut RandomStream::new(seed)))?;
    emit(out, &write_arrays(&draws))?;
    Ok(0)
}

fn cmd_density(model: &ModelArgs, inputs: &[PathBuf], out: Option<&Path>) -> CliResult<u8> {
    let model = model.model()?;
    let mut text = String::new();
    let mut index = 0usize;
    for path in inputs {
        let arrays = read_arrays(&read_file(path)?).map_err(|e| Failure::from_lib(e, Some(path)))?;
        for x in arrays {
            index += 1;
            if x.shape() != model.mean().shape() {
                return Err(Failure::usage(format!(
                    "{}: array {index} has shape {:?}, model expects {:?}",
                    path.display(),
                    x.dims(),
                    model.mean().dims()
                )));
            }
            let lp = lib(model.logpdf_elliptical(&x))?;
            text.push_str(&fmt_real(lp));
            text.push('\n');
        }
    }
    emit(out, &text)?;
    Ok(0)
}

fn cmd_lstsq(factors: &[PathBuf], input: &Path, out: Option<&Path>) -> CliResult<u8> {
    let maps = factors.iter().map(|p| load_matrix(p)).collect::<CliResult<Vec<_>>>()?;
    let maps = lib(ModeMaps::new(maps))?;
    let y = load_array(input)?;
    let xhat = multilinear_lstsq(&maps, &y).map_err(|e| match e {
        Error::Singular { mode: Some(j) } => Failure {
            code: 3,
            msg: format!("mode map {j} ({}) is rank deficient", factors[j - 1].display()),
        },
        e => Failure::from_lib(e, None),
    })?;
    emit(out, &write_array(&xhat))?;
    Ok(0)
}

fn cmd_verify(model: &ModelArgs, n: usize, seed: u64, out: Option<&Path>) -> CliResult<u8> {
    if n < MIN_VERIFY_N {
        return Err(Failure::usage(format!("--n must be at least {MIN_VERIFY_N}")));
    }
    let model = model.model()?;
    let reports = lib(verify_model(&model, n, seed))?;
    let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    emit(out, &text)?;
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn cmd_radial(
    model: &ModelArgs,
    dim: Option<usize>,
    rmax: f64,
    steps: usize,
    out: Option<&Path>,
) -> CliResult<u8> {
    if !(rmax > 0.0 && rmax.is_finite()) {
        return Err(Failure::usage("--rmax must be a positive finite number"));
    }
    if steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    let kernel = model.kernel()?;
    let k = match dim {
        Some(0) => return Err(Failure::usage("--dim must be at least 1")),
        Some(k) => k,
        None => model
            .implied_dim()?
            .ok_or_else(|| Failure::usage("--dim (or --factor/--mean) is required"))?,
    };
    let mut text = String::new();
    for i in 0..=steps {
        let r = rmax * i as f64 / steps as f64;
        let v = lib(radial_pdf(&kernel, r, k))?;
        text.push_str(&format!("{} {}\n", fmt_real(r), fmt_real(v)));
    }
    emit(out, &text)?;
    Ok(0)
}

fn run(cli: Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Sample { model, n, seed, out } => cmd_sample(model, *n, *seed, out.as_deref()),
        Command::Density { model, input, out } => cmd_density(model, input, out.as_deref()),
        Command::Lstsq { factor, input, out } => cmd_lstsq(factor, input, out.as_deref()),
        Command::Verify { model, n, seed, out } => cmd_verify(model, *n, *seed, out.as_deref()),
        Command::Radial { model, dim, rmax, steps, out } => {
            cmd_radial(model, *dim, *rmax, *steps, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
