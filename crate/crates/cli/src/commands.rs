use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use dctx_core::blockdct::{compress, decompress, degrade_double, lossless_coefficients};
use dctx_core::collocate::embed_component;
use dctx_core::jfif::{encode_jpeg, parse_jpeg};
use dctx_core::metrics::{
    bhattacharyya, dct_histograms, js_divergence, psnr_b_on, psnr_on, ssim, write_csv, MetricChannel, MetricsReport,
    DEFAULT_BINS,
};
use dctx_core::{pnm, PixelImage, Plane, QuantizedImage, Subsampling};
use dctx_net::checkpoint::Checkpoint;
use dctx_net::{jpeg_coefficients, kv, load_checkpoint, save_checkpoint, Model, ModelConfig, TrainConfig, Trainer};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::{Cli, Command, DecodeArgs, DegradeArgs, EvalArgs, InitArgs, InspectArgs, RecoverArgs, TrainArgs};

pub const TRACE_HEADER: &str = "step,lr,loss,grad_norm";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Degrade(a) => degrade(a),
        Command::Decode(a) => decode(a),
        Command::Recover(a) => recover(a),
        Command::Train(a) => train(a),
        Command::Init(a) => init(a),
        Command::Eval(a) => eval(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn read_jpeg(path: &Path) -> Result<QuantizedImage> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(parse_jpeg(&bytes)?)
}

fn read_image(path: &Path) -> Result<PixelImage> {
    pnm::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_subsampling(s: &str) -> Result<Subsampling> {
    s.parse().map_err(|e: String| CliError::Usage(e))
}

fn parse_shift(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("shift {s:?} must be \"dx,dy\""));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Fraction of zero quantized coefficients over all components.
pub fn sparsity(q: &QuantizedImage) -> f64 {
    let (zeros, total) = q.components.iter().fold((0usize, 0usize), |(z, t), c| {
        (z + c.coeffs.data.iter().filter(|&&v| v == 0).count(), t + c.coeffs.data.len())
    });
    zeros as f64 / total as f64
}

fn degrade(a: DegradeArgs) -> Result<()> {
    let img = read_image(&a.input)?;
    let sub = parse_subsampling(&a.subsampling)?;
    let shift = parse_shift(&a.shift)?;
    let mut m = RunManifest::new("degrade");
    let q = match (a.qf, a.qf1, a.qf2) {
        (Some(qf), None, None) => {
            if shift != (0, 0) {
                return Err(CliError::Usage("--shift needs --qf1/--qf2".into()));
            }
            m.config = format!("qf = {qf}\nsubsampling = {}\n", a.subsampling);
            compress(&img, qf, sub)?
        }
        (None, Some(qf1), Some(qf2)) => {
            m.config = format!(
                "qf1 = {qf1}\nqf2 = {qf2}\nshift = {},{}\nsubsampling = {}\n",
                shift.0, shift.1, a.subsampling
            );
            degrade_double(&img, qf1, qf2, shift, sub)?
        }
        _ => return Err(CliError::Usage("give either --qf or both --qf1 and --qf2".into())),
    };
    fs::write(&a.output, encode_jpeg(&q)?)?;
    println!("sparsity: {:.2}% zero coefficients", 100.0 * sparsity(&q));
    m.inputs.push(a.input);
    m.outputs.push(a.output);
    m.write()?;
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let q = read_jpeg(&a.input)?;
    pnm::write(&a.output, &decompress(&q))?;
    let mut m = RunManifest::new("decode");
    m.inputs.push(a.input);
    m.outputs.push(a.output);
    m.write()?;
    Ok(())
}

fn dump_channels(dir: &Path, prefix: &str, coeffs: &Plane) -> Result<()> {
    fs::create_dir_all(dir)?;
    let map = dctx_core::collocate::rearrange(
        coeffs,
        dctx_core::ComponentKind::Luma,
        &dctx_core::QuantMatrix::ones(dctx_core::ComponentKind::Luma),
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    for k in 0..64 {
        pnm::write_normalized_pgm(dir.join(format!("{prefix}_{:02}.pgm", k)), &map.channel(k))?;
    }
    Ok(())
}

fn recover(a: RecoverArgs) -> Result<()> {
    let q = read_jpeg(&a.input)?;
    let ck = load_checkpoint(&a.checkpoint, None)?;
    let rec = ck.model.recover(&q)?;
    pnm::write(&a.output, &rec.image)?;
    if let Some(dir) = &a.dump_coeffs {
        dump_channels(dir, "y", &rec.coefficients[0])?;
    }
    let mut m = RunManifest::new("recover");
    m.config = ck.model.config.to_text();
    m.inputs.extend([a.input, a.checkpoint]);
    m.outputs.push(a.output);
    m.outputs.extend(a.dump_coeffs);
    m.write()?;
    Ok(())
}

/// Model and training settings after config file, flags and overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub model_seed: u64,
}

impl ResolvedConfig {
    pub fn to_text(&self) -> String {
        format!("model_seed = {}\n{}{}", self.model_seed, self.model.to_text(), self.train.to_text())
    }
}

/// Layer `key = value` settings over `base`: config file first, then each
/// `--set KEY=VALUE`. Keys belong to the model, the trainer, or are
/// `model_seed`.
pub fn resolve_config(base: ResolvedConfig, file: Option<&Path>, overrides: &[String]) -> Result<ResolvedConfig> {
    let mut cfg = base;
    let mut pairs = Vec::new();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        pairs.extend(kv::parse(&text)?);
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override {o:?} is not KEY=VALUE")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    for (k, v) in pairs {
        if k == "model_seed" {
            cfg.model_seed = kv::value(&k, &v)?;
        } else if !cfg.model.set(&k, &v)? && !cfg.train.set(&k, &v)? {
            return Err(CliError::Usage(format!("unknown configuration key {k:?}")));
        }
    }
    cfg.model.validate()?;
    cfg.train.validate()?;
    Ok(cfg)
}

/// Every PPM/PGM in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(PathBuf, PixelImage)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("ppm" | "pgm" | "pnm")))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| read_image(&p).map(|img| (p, img))).collect()
}

fn trace_path(a: &TrainArgs) -> PathBuf {
    a.trace.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_os_string();
        s.push(".trace.csv");
        PathBuf::from(s)
    })
}

fn train(a: TrainArgs) -> Result<()> {
    let mut overrides = Vec::new();
    if let Some(s) = a.steps {
        overrides.push(format!("steps={s}"));
    }
    if let Some(s) = a.seed {
        overrides.push(format!("seed={s}"));
    }
    overrides.extend(a.overrides.iter().cloned());

    let (mut trainer, cfg) = match &a.resume {
        Some(path) => {
            let ck = load_checkpoint(path, None)?;
            let base = ResolvedConfig {
                model: ck.model.config.clone(),
                train: ck.train.clone(),
                model_seed: 0,
            };
            let base_train = if a.double_jpeg { base.train.clone().fine_tune() } else { base.train.clone() };
            let cfg = resolve_config(ResolvedConfig { train: base_train, ..base.clone() }, a.config.as_deref(), &overrides)?;
            if cfg.model != base.model {
                return Err(CliError::Input(format!(
                    "ConfigMismatch: resumed checkpoint has\n{}",
                    base.model.to_text()
                )));
            }
            (ck.into_trainer(cfg.train.clone())?, cfg)
        }
        None => {
            let base = ResolvedConfig {
                model: ModelConfig::toy(),
                train: TrainConfig::default(),
                model_seed: 0,
            };
            let mut cfg = resolve_config(base, a.config.as_deref(), &[])?;
            if a.double_jpeg {
                cfg.train = cfg.train.fine_tune();
            }
            let cfg = resolve_config(cfg, None, &overrides)?;
            let model = Model::new(cfg.model.clone(), cfg.model_seed)?;
            (Trainer::new(model, cfg.train.clone())?, cfg)
        }
    };

    let corpus: Vec<PixelImage> = load_corpus(&a.corpus)?.into_iter().map(|(_, img)| img).collect();
    let trace = trace_path(&a);
    let mut out = std::io::BufWriter::new(fs::File::create(&trace)?);
    writeln!(out, "{TRACE_HEADER}")?;
    while !trainer.is_done() && a.stop_at.is_none_or(|s| trainer.step < s) {
        let r = trainer.train_step(&corpus)?;
        writeln!(out, "{},{:e},{},{}", r.step, r.lr, r.loss, r.grad_norm)?;
        if a.log_every > 0 && (r.step % a.log_every == 0 || trainer.is_done()) {
            eprintln!("step {:>6}  lr {:.3e}  loss {:.5}  |g| {:.3}", r.step, r.lr, r.loss, r.grad_norm);
        }
        if let Some(n) = a.save_every {
            if n > 0 && trainer.step % n == 0 && !trainer.is_done() {
                save_checkpoint(&a.out, &Checkpoint::from_trainer(&trainer))?;
            }
        }
    }
    out.flush()?;
    save_checkpoint(&a.out, &Checkpoint::from_trainer(&trainer))?;

    let mut m = RunManifest::new("train");
    m.seed = Some(cfg.train.seed);
    m.config = cfg.to_text();
    m.inputs.push(a.corpus);
    m.inputs.extend(a.config);
    m.inputs.extend(a.resume);
    m.outputs.extend([a.out, trace]);
    m.write()?;
    Ok(())
}

fn init(a: InitArgs) -> Result<()> {
    let base = ResolvedConfig {
        model: ModelConfig::toy(),
        train: TrainConfig::default(),
        model_seed: a.seed.unwrap_or(0),
    };
    let mut overrides = a.overrides.clone();
    if let Some(s) = a.seed {
        overrides.push(format!("model_seed={s}"));
    }
    let cfg = resolve_config(base, a.config.as_deref(), &overrides)?;
    let trainer = Trainer::new(Model::new(cfg.model.clone(), cfg.model_seed)?, cfg.train.clone())?;
    save_checkpoint(&a.out, &Checkpoint::from_trainer(&trainer))?;
    println!("{} parameters", trainer.model.param_count());
    let mut m = RunManifest::new("init");
    m.seed = Some(cfg.model_seed);
    m.config = cfg.to_text();
    m.outputs.push(a.out);
    m.write()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalPair {
    pub name: String,
    pub reference: PathBuf,
    pub test: PathBuf,
}

/// "reference,test" lines; blank lines, `#` comments and a header line
/// starting with a non-path word followed by no file are skipped.
pub fn parse_pairs(list: &Path) -> Result<Vec<EvalPair>> {
    let text = fs::read_to_string(list).map_err(|e| CliError::Input(format!("{}: {e}", list.display())))?;
    let base = list.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| CliError::Input(format!("{}:{}: expected two comma-separated paths", list.display(), i + 1)))?;
        let (a, b) = (a.trim(), b.trim());
        if i == 0 && (a == "reference" || a == "gt") {
            continue;
        }
        let reference = base.join(a);
        out.push(EvalPair {
            name: stem(&reference),
            reference,
            test: base.join(b),
        });
    }
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn dir_pairs(gt: &Path, jpg: &Path) -> Result<Vec<EvalPair>> {
    load_corpus_paths(gt)?
        .into_iter()
        .map(|reference| {
            let name = stem(&reference);
            let test = ["jpg", "jpeg"]
                .iter()
                .map(|e| jpg.join(format!("{name}.{e}")))
                .find(|p| p.exists())
                .ok_or_else(|| CliError::MissingPair(reference.display().to_string()))?;
            Ok(EvalPair { name, reference, test })
        })
        .collect()
}

fn load_corpus_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("ppm" | "pgm" | "pnm")))
        .collect();
    paths.sort();
    Ok(paths)
}

struct Scorer {
    channel: MetricChannel,
    dct: bool,
}

impl Scorer {
    fn row(
        &self,
        name: &str,
        qf: u32,
        method: &str,
        reference: &PixelImage,
        test: &PixelImage,
        coeffs: Option<(&[Plane], &[Plane])>,
    ) -> Result<MetricsReport> {
        if reference.dims() != test.dims() || reference.planes.len() != test.planes.len() {
            return Err(CliError::Input(format!(
                "DimMismatch: {name}: reference {:?}x{} vs test {:?}x{}",
                reference.dims(),
                reference.planes.len(),
                test.dims(),
                test.planes.len()
            )));
        }
        let (mut js, mut bha) = (f64::NAN, f64::NAN);
        if let (true, Some((r, t))) = (self.dct, coeffs) {
            let hr = dct_histograms(r, DEFAULT_BINS)?;
            let ht = dct_histograms(t, DEFAULT_BINS)?;
            js = js_divergence(&hr, &ht)?;
            bha = bhattacharyya(&hr, &ht)?;
        }
        Ok(MetricsReport {
            image: name.to_string(),
            qf,
            method: method.to_string(),
            psnr: psnr_on(reference, test, self.channel)?,
            ssim: ssim(reference, test)?,
            psnr_b: psnr_b_on(reference, test, self.channel)?,
            js,
            bha,
        })
    }
}

fn is_jpeg(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("jpg" | "jpeg" | "jfif")
    )
}

fn eval(a: EvalArgs) -> Result<()> {
    let pairs = match (&a.pairs, &a.dir) {
        (Some(list), None) => parse_pairs(list)?,
        (None, Some(d)) => dir_pairs(&d[0], &d[1])?,
        _ => return Err(CliError::Usage("give --pairs LIST or --dir GT_DIR JPG_DIR".into())),
    };
    if pairs.is_empty() {
        return Err(CliError::Input("no image pairs to evaluate".into()));
    }
    let model = match &a.checkpoint {
        Some(p) => Some(load_checkpoint(p, None)?.model),
        None => None,
    };
    let scorer = Scorer {
        channel: a.metric_channel,
        dct: a.dct_metrics,
    };
    let mut rows: Vec<MetricsReport> = Vec::new();
    for p in &pairs {
        let reference = read_image(&p.reference)?;
        if !p.test.exists() {
            return Err(CliError::MissingPair(p.test.display().to_string()));
        }
        if is_jpeg(&p.test) {
            let q = read_jpeg(&p.test)?;
            let qf = q.qm(0).estimate_qf().unwrap_or(0);
            let lossless = if a.dct_metrics {
                lossless_coefficients(&reference, q.subsampling)?
            } else {
                Vec::new()
            };
            let jc = if a.dct_metrics { jpeg_coefficients(&q) } else { Vec::new() };
            rows.push(scorer.row(&p.name, qf, "jpeg", &reference, &decompress(&q), Some((&lossless, &jc)))?);
            if let Some(m) = &model {
                let rec = m.recover(&q)?;
                rows.push(scorer.row(&p.name, qf, "model", &reference, &rec.image, Some((&lossless, &rec.coefficients)))?);
            }
        } else {
            let test = read_image(&p.test)?;
            let (r, t) = if a.dct_metrics {
                (
                    lossless_coefficients(&reference, Subsampling::S444)?,
                    lossless_coefficients(&test, Subsampling::S444)?,
                )
            } else {
                (Vec::new(), Vec::new())
            };
            rows.push(scorer.row(&p.name, 0, "image", &reference, &test, Some((&r, &t)))?);
        }
    }
    let mut methods: Vec<String> = Vec::new();
    for r in &rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let means: Vec<MetricsReport> = methods
        .iter()
        .filter_map(|m| {
            let sel: Vec<MetricsReport> = rows.iter().filter(|r| &r.method == m).cloned().collect();
            MetricsReport::mean(&sel, "mean")
        })
        .collect();
    for r in &means {
        println!(
            "{:<6} psnr {:.3}  ssim {:.4}  psnr_b {:.3}  js {:.5}  bha {:.5}",
            r.method, r.psnr, r.ssim, r.psnr_b, r.js, r.bha
        );
    }
    rows.extend(means);
    write_csv(fs::File::create(&a.report)?, &rows)?;

    let mut m = RunManifest::new("eval");
    m.config = format!(
        "dct_metrics = {}\nmetric_channel = {}\n",
        a.dct_metrics,
        match a.metric_channel {
            MetricChannel::Rgb => "rgb",
            MetricChannel::Y => "y",
        }
    );
    m.inputs.extend(pairs.iter().flat_map(|p| [p.reference.clone(), p.test.clone()]));
    m.inputs.extend(a.checkpoint);
    m.outputs.push(a.report);
    m.write()?;
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let q = read_jpeg(&a.input)?;
    let (h, w) = q.pixel_dims;
    println!("size: {w}x{h}");
    println!("components: {}", q.components.len());
    if !q.is_gray() {
        println!("subsampling: {}", q.subsampling);
    }
    println!("zero coefficients: {:.2}%", 100.0 * sparsity(&q));
    for (i, t) in q.quant_tables.iter().enumerate() {
        match t.estimate_qf() {
            Some(qf) => println!("quantization table {i} (quality {qf}):"),
            None => println!("quantization table {i}:"),
        }
        for row in t.values.chunks(8) {
            println!("  {}", row.iter().map(|v| format!("{v:>4}")).collect::<String>());
        }
    }
    for (c, comp) in q.components.iter().enumerate() {
        let blocks = comp.coeffs.blocks_high() * comp.coeffs.blocks_wide();
        let mut zeros = [0usize; 64];
        for bi in 0..comp.coeffs.blocks_high() {
            for bj in 0..comp.coeffs.blocks_wide() {
                for (k, v) in comp.coeffs.block(bi, bj).iter().enumerate() {
                    zeros[k] += usize::from(*v == 0);
                }
            }
        }
        println!(
            "component {c}: {}x{} blocks, zero rate per frequency (%):",
            comp.coeffs.blocks_wide(),
            comp.coeffs.blocks_high()
        );
        for row in zeros.chunks(8) {
            println!(
                "  {}",
                row.iter()
                    .map(|&z| format!("{:>6.1}", 100.0 * z as f64 / blocks as f64))
                    .collect::<String>()
            );
        }
    }
    if let Some(dir) = &a.dump {
        fs::create_dir_all(dir)?;
        let map = embed_component(&q, 0).map_err(|e| CliError::Input(e.to_string()))?;
        for k in 0..64 {
            pnm::write_normalized_pgm(dir.join(format!("y_{k:02}.pgm")), &map.channel(k))?;
        }
        let mut m = RunManifest::new("inspect");
        m.inputs.push(a.input);
        m.outputs.push(dir.clone());
        m.write()?;
    }
    Ok(())
}
