use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use r3sgm::eval::{self, EvalPair, Protocol};
use r3sgm::image::{self, RegionMask};
use r3sgm::synthetic::{random_dot_stereogram, RdsSpec};
use r3sgm::{Algorithm, DisparityMap, GrayImage, PipelineOptions, StereoParams};

#[derive(Parser)]
#[command(name = "r3sgm", version, about = "Streaming semi-global stereo matching")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a disparity map from a rectified pair.
    Compute(ComputeArgs),
    /// Score a disparity map against ground truth.
    Eval(EvalArgs),
    /// Sweep the census window width over a dataset and emit CSV.
    Sweep(SweepArgs),
    /// Time the streaming engine and report its buffer ceiling.
    Bench(BenchArgs),
    /// Write a random-dot stereo pair with exact ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct StereoArgs {
    /// Largest disparity searched.
    #[arg(long, default_value_t = 64)]
    dmax: usize,
    /// Census window width (odd, 3..=15).
    #[arg(long, default_value_t = 13)]
    window: usize,
    #[arg(long, default_value_t = 8)]
    p1: u32,
    #[arg(long, default_value_t = 96)]
    p2: u32,
    #[arg(long, default_value_t = 1.0)]
    lr_abs: f64,
    #[arg(long, default_value_t = 0.03)]
    lr_rel: f64,
}

impl StereoArgs {
    fn params(&self) -> Result<StereoParams> {
        let p = StereoParams {
            d_max: self.dmax,
            window: self.window,
            p1: self.p1,
            p2: self.p2,
            lr_abs: self.lr_abs,
            lr_rel: self.lr_rel,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args, Clone)]
struct PostArgs {
    /// r3sgm, sgm8, sgm4 or mgm.
    #[arg(long, default_value = "r3sgm")]
    algo: Algorithm,
    #[arg(long)]
    no_median: bool,
    #[arg(long)]
    no_lr_check: bool,
    /// Fill invalid pixels with the row-wise background rule.
    #[arg(long)]
    interpolate: bool,
}

impl PostArgs {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            algo: self.algo,
            median: !self.no_median,
            lr_check: !self.no_lr_check,
            interpolate: self.interpolate,
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Output PFM.
    #[arg(long)]
    out: PathBuf,
    /// Also write the right-view map next to the output as <stem>_right.pfm.
    #[arg(long)]
    dump_right: bool,
    #[command(flatten)]
    stereo: StereoArgs,
    #[command(flatten)]
    post: PostArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimated disparity (PFM).
    #[arg(long)]
    est: PathBuf,
    /// Ground truth (PGM or PFM).
    #[arg(long)]
    gt: PathBuf,
    /// Divisor applied to stored ground-truth values.
    #[arg(long, default_value_t = 1.0)]
    gt_scale: f64,
    /// kitti or middlebury.
    #[arg(long, default_value = "kitti")]
    protocol: Protocol,
    /// Region mask PGM (255 = scored).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Append a CSV row to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Left image; repeat once per pair.
    #[arg(long, required = true)]
    left: Vec<PathBuf>,
    #[arg(long, required = true)]
    right: Vec<PathBuf>,
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    /// Optional mask per pair.
    #[arg(long)]
    mask: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    gt_scale: f64,
    #[arg(long, default_value = "kitti")]
    protocol: Protocol,
    /// Comma-separated census widths.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7,9,11,13")]
    widths: Vec<usize>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write NA in the px_per_s column so output depends only on the inputs.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    stereo: StereoArgs,
    #[command(flatten)]
    post: PostArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, requires = "right", conflicts_with = "synthetic")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// Benchmark a generated WxH pair instead of files.
    #[arg(long, value_name = "WxH")]
    synthetic: Option<String>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    stereo: StereoArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for left.pgm, right.pgm, gt.pfm and nonocc.pgm.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 320)]
    width: usize,
    #[arg(long, default_value_t = 240)]
    height: usize,
    #[arg(long, default_value_t = 4)]
    background: u16,
    #[arg(long, default_value_t = 20)]
    foreground: u16,
    /// Grey levels in the dot texture.
    #[arg(long, default_value_t = 255)]
    levels: u8,
    /// Dot size in pixels.
    #[arg(long, default_value_t = 1)]
    dot: usize,
    /// Per-image noise amplitude.
    #[arg(long, default_value_t = 0)]
    noise: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Compute(a) => compute(a),
        Cmd::Eval(a) => eval_cmd(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Synth(a) => synth(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_pair(left: &Path, right: &Path) -> Result<(GrayImage, GrayImage)> {
    let l = image::read_pgm(left).with_context(|| format!("reading {}", left.display()))?;
    let r = image::read_pgm(right).with_context(|| format!("reading {}", right.display()))?;
    Ok((l, r))
}

fn right_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("disparity");
    out.with_file_name(format!("{stem}_right.pfm"))
}

fn compute(a: ComputeArgs) -> Result<()> {
    let params = a.stereo.params()?;
    let opts = a.post.options();
    let (left, right) = read_pair(&a.left, &a.right)?;
    eprintln!(
        "{}: {}x{} pair, d_max {}, window {}",
        opts.algo,
        left.width(),
        left.height(),
        params.d_max,
        params.window
    );
    let t0 = Instant::now();
    let out = r3sgm::run_pipeline(&left, &right, &params, &opts)?;
    let secs = t0.elapsed().as_secs_f64();
    image::write_pfm(&a.out, &out.disparity).with_context(|| format!("writing {}", a.out.display()))?;
    if a.dump_right {
        let p = right_path(&a.out);
        image::write_pfm(&p, &out.right).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("algo={}", opts.algo);
    println!("width={}", left.width());
    println!("height={}", left.height());
    println!("density={:.4}", out.disparity.density());
    println!("valid={}", out.disparity.valid_count());
    println!("seconds={secs:.4}");
    println!("px_per_s={:.0}", (left.width() * left.height()) as f64 / secs.max(1e-9));
    if let Some(s) = out.stats {
        println!("peak_buffer={}", s.peak_cost_bytes());
    }
    Ok(())
}

fn read_est(path: &Path) -> Result<DisparityMap> {
    image::read_disparity_pfm(path).with_context(|| format!("reading {}", path.display()))
}

fn read_mask(path: &Path) -> Result<RegionMask> {
    image::read_mask(path).with_context(|| format!("reading {}", path.display()))
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let est = read_est(&a.est)?;
    let gt = image::read_gt(&a.gt, a.gt_scale).with_context(|| format!("reading {}", a.gt.display()))?;
    let mask = a.mask.as_deref().map(read_mask).transpose()?;
    let r = eval::bad_pixel_rate(&est, &gt, a.protocol, mask.as_ref())?;
    println!("protocol={}", a.protocol);
    println!("bad_valid={:.4}", r.bad_rate_valid);
    println!("density={:.4}", r.density);
    println!("bad_interp={:.4}", r.bad_rate_interpolated);
    println!("n_compared={}", r.n_compared);
    println!("n_gt_valid={}", r.n_gt_valid);
    println!("n_bad={}", r.n_bad);
    if let Some(path) = &a.csv {
        let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        if fresh {
            writeln!(f, "est,protocol,bad_valid,density,bad_interp,n_compared")?;
        }
        writeln!(
            f,
            "{},{},{:.4},{:.4},{:.4},{}",
            a.est.display(),
            a.protocol,
            r.bad_rate_valid,
            r.density,
            r.bad_rate_interpolated,
            r.n_compared
        )?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let n = a.left.len();
    if a.right.len() != n || a.gt.len() != n {
        bail!("sweep needs the same number of --left, --right and --gt paths");
    }
    if !a.mask.is_empty() && a.mask.len() != n {
        bail!("--mask must be given once per pair or not at all");
    }
    let params = a.stereo.params()?;
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let (left, right) = read_pair(&a.left[i], &a.right[i])?;
        let gt = image::read_gt(&a.gt[i], a.gt_scale)
            .with_context(|| format!("reading {}", a.gt[i].display()))?;
        let mask = a.mask.get(i).map(|p| read_mask(p)).transpose()?;
        pairs.push(EvalPair { left, right, gt, mask });
    }
    eprintln!("sweeping {} widths over {n} pair(s)", a.widths.len());
    let rows = eval::sweep_window(
        &pairs,
        &a.widths,
        &params,
        &a.post.options(),
        a.protocol,
        !a.no_timing,
    )?;
    match &a.csv {
        Some(path) => {
            let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            eval::write_sweep_csv(f, &rows)?;
        }
        None => eval::write_sweep_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("expected WxH, got {s:?}"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn bench(a: BenchArgs) -> Result<()> {
    let params = a.stereo.params()?;
    let (left, right) = match (&a.left, &a.right, &a.synthetic) {
        (Some(l), Some(r), _) => read_pair(l, r)?,
        (None, None, Some(size)) => {
            let (w, h) = parse_size(size)?;
            let spec = RdsSpec::simple(w, h, 0, params.d_max.min(usize::from(u16::MAX)) as u16 / 2);
            let f = random_dot_stereogram(&spec, 0)?;
            (f.left, f.right)
        }
        _ => bail!("bench needs --left and --right, or --synthetic WxH"),
    };
    let t = eval::throughput(&left, &right, &params, a.repeats)?;
    println!(
        "width={} height={} dmax={} window={} repeats={} median_s={:.4} px_per_s={:.0} peak_entries={} peak_buffer={}",
        left.width(),
        left.height(),
        params.d_max,
        params.window,
        a.repeats,
        t.median_secs,
        t.px_per_s,
        t.peak_cost_entries,
        t.peak_buffer_bytes
    );
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = RdsSpec {
        levels: a.levels,
        dot: a.dot,
        noise: a.noise,
        ..RdsSpec::simple(a.width, a.height, a.background, a.foreground)
    };
    let f = random_dot_stereogram(&spec, a.seed)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let dir = &a.out_dir;
    image::write_pgm(dir.join("left.pgm"), &f.left)?;
    image::write_pgm(dir.join("right.pgm"), &f.right)?;
    image::write_pfm(dir.join("gt.pfm"), &r3sgm::synthetic::gt_as_map(&f.gt))?;
    let mask = GrayImage::new(
        a.width,
        a.height,
        f.nonocc.inside.iter().map(|&b| if b { 255 } else { 0 }).collect(),
    )?;
    image::write_pgm(dir.join("nonocc.pgm"), &mask)?;
    println!("max_disparity={}", spec.max_disparity());
    println!("nonocc={}", f.nonocc.count());
    Ok(())
}
