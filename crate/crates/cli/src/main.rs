use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sgft::codec::{self, CodecConfig, DepthImage, Method};
use sgft::eval;
use sgft::graph::{self, SignedGraph};
use sgft::markov::MarkovModel1D;
use sgft::spectral;
use sgft::Exec;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sgft", version, about = "Signed graph Fourier transform tools and depth image codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress an 8-bit PGM depth image.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, default_value_t = 32)]
        qp: u8,
        #[arg(long, default_value = "sgft")]
        method: Method,
        /// Also write the encoder's reconstruction.
        #[arg(long)]
        recon: Option<PathBuf>,
    },
    /// Decompress a bitstream to PGM.
    Decode { input: PathBuf, output: PathBuf },
    /// Rate-distortion sweep, one CSV row per (method, qp).
    RdSweep {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "sgft,wgft,dct")]
        methods: Vec<Method>,
        /// Overrides the per-method default qp lists.
        #[arg(long, value_delimiter = ',')]
        qps: Option<Vec<u8>>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
        /// Use the given SGFT weight instead of searching for one.
        #[arg(long)]
        fixed_w: bool,
        #[arg(long)]
        sequential: bool,
    },
    /// Print the eigenbasis of a graph's loopy Laplacian.
    BasisDump {
        #[command(flatten)]
        source: GraphSource,
        /// Replace negative edges by their magnitude and drop self-loops.
        #[arg(long)]
        wgft: bool,
        #[arg(long, default_value = "text", value_parser = ["text", "csv"])]
        format: String,
        /// Only the first COUNT eigenpairs.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Loopy Laplacian, spectrum, inertia and PSD verdict of a graph.
    Analyze {
        #[command(flatten)]
        source: GraphSource,
        /// Build the four-node indefiniteness example: SIDE_VAR BREAK_VAR EPSILON.
        #[arg(long, num_args = 3, value_names = ["SIDE_VAR", "BREAK_VAR", "EPSILON"], conflicts_with_all = ["graph", "line"])]
        demo: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, default_value_t = 0.1)]
    w: f64,
    #[arg(long, default_value_t = 0.1)]
    w_pos: f64,
    #[arg(long, default_value_t = 30)]
    threshold: u8,
}

impl CodecArgs {
    fn config(&self) -> CodecConfig {
        CodecConfig { w: self.w, w_pos: self.w_pos, contour_threshold: self.threshold, ..CodecConfig::default() }
    }
}

#[derive(Args)]
#[group(multiple = false)]
struct GraphSource {
    /// Graph file: first line the node count, then `E i j w` and `S i w`
    /// lines with 1-based nodes.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Optimal line graph of a one-break Markov model: N K VAR_1 .. VAR_N,
    /// with VAR_1 = inf for an uninformative first sample.
    #[arg(long, num_args = 3.., allow_negative_numbers = true, value_names = ["N", "K", "VAR"])]
    line: Option<Vec<String>>,
}

struct Usage(String);

impl std::fmt::Debug for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Encode { input, output, codec, qp, method, recon } => {
            let img = DepthImage::read_pgm(&input)?;
            let config = CodecConfig { qp, method, ..codec.config() };
            let enc = codec::encode(&img, &config)?;
            fs::write(&output, &enc.bytes).with_context(|| format!("writing {}", output.display()))?;
            if let Some(path) = recon {
                enc.reconstruction.write_pgm(path)?;
            }
            let bpp = enc.bits() as f64 / (img.width() * img.height()) as f64;
            let psnr = eval::psnr(&img, &enc.reconstruction)?;
            eprintln!("{} bytes, {bpp:.4} bpp, {psnr:.2} dB", enc.bytes.len());
        }
        Command::Decode { input, output } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            codec::decode(&bytes)?.write_pgm(&output)?;
        }
        Command::RdSweep { input, methods, qps, csv, codec, fixed_w, sequential } => {
            let img = DepthImage::read_pgm(&input)?;
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let mut config = codec.config();
            let mut meta = vec![("image", input.display().to_string())];
            if !fixed_w && methods.contains(&Method::Sgft) {
                let (w, psnr) = eval::search_w(&img, &config, exec)?;
                config.w = w;
                meta.push(("w_search_psnr_qp32", format!("{psnr:.4}")));
            }
            meta.push(("w", format!("{}", config.w)));
            meta.push(("w_pos", format!("{}", config.w_pos)));
            meta.push(("threshold", config.contour_threshold.to_string()));
            let jobs: Vec<(Method, u8)> = methods
                .iter()
                .flat_map(|&m| {
                    let list = qps.clone().unwrap_or_else(|| eval::default_qps(m).to_vec());
                    list.into_iter().map(move |qp| (m, qp))
                })
                .collect();
            let points = eval::rd_sweep_jobs(&img, &jobs, &config, exec)?;
            let text = eval::to_csv(&points, &meta);
            match csv {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::BasisDump { source, wgft, format, count } => {
            let (g, _) = load_graph(&source)?;
            let g = if wgft { positive_variant(&g)? } else { g };
            let basis = spectral::eigendecompose(&g.loopy_laplacian())?;
            let n = basis.order();
            let shown = count.unwrap_or(n).min(n);
            let mut out = String::new();
            if format == "csv" {
                out.push_str("index,eigenvalue");
                for j in 1..=n {
                    write!(out, ",v{j}")?;
                }
                out.push('\n');
            } else {
                writeln!(out, "# nodes {n}")?;
                writeln!(out, "# index eigenvalue vector")?;
            }
            let sep = if format == "csv" { "," } else { " " };
            for i in 0..shown {
                let mut row = vec![(i + 1).to_string(), fmt_num(basis.eigenvalues()[i])];
                row.extend(basis.vector(i).into_iter().map(fmt_num));
                writeln!(out, "{}", row.join(sep))?;
            }
            print!("{out}");
        }
        Command::Analyze { source, demo } => {
            let (g, model) = match demo {
                Some(v) => (graph::indefiniteness_demo_graph(v[0], v[1], v[2])?, None),
                None => load_graph(&source)?,
            };
            let q = g.loopy_laplacian();
            let mut out = String::new();
            writeln!(out, "loopy laplacian ({0}x{0}):", q.order())?;
            out.push_str(&q.to_text());
            let eig = spectral::eigenvalues(&q)?;
            writeln!(out, "eigenvalues: {}", eig.iter().map(|&l| fmt_num(l)).collect::<Vec<_>>().join(" "))?;
            let inertia = graph::inertia(&q)?;
            writeln!(
                out,
                "inertia: positive {} negative {} zero {}",
                inertia.positive, inertia.negative, inertia.zero
            )?;
            let psd = spectral::psd_check(&q)?;
            writeln!(
                out,
                "verdict: {} (min eigenvalue {})",
                if psd.is_psd { "PSD" } else { "indefinite" },
                fmt_num(psd.min_eigenvalue)
            )?;
            if let Some(model) = model {
                let p = model.precision();
                writeln!(out, "max |Q - P|: {}", fmt_num(q.max_abs_diff(&p)))?;
                if !model.first_precision_zero() {
                    let diff = p.get(0, 0) - q.get(0, 0);
                    let mut rest = q.clone();
                    rest.set(0, 0, p.get(0, 0));
                    writeln!(out, "P(1,1) - Q(1,1): {} (other entries max {})", fmt_num(diff), fmt_num(rest.max_abs_diff(&p)))?;
                }
            }
            print!("{out}");
        }
    }
    Ok(())
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.12e}")
    }
}

fn load_graph(source: &GraphSource) -> anyhow::Result<(SignedGraph, Option<MarkovModel1D>)> {
    if let Some(path) = &source.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok((SignedGraph::from_text(&text)?, None));
    }
    let Some(args) = &source.line else {
        return Err(usage("one of --graph, --line or --demo is required"));
    };
    let n: usize = args[0].parse().map_err(|_| usage(format!("bad node count {:?}", args[0])))?;
    let k: usize = args[1].parse().map_err(|_| usage(format!("bad break index {:?}", args[1])))?;
    let vars = &args[2..];
    if vars.len() != n {
        return Err(usage(format!("--line {n} needs {n} variances, got {}", vars.len())));
    }
    let sigma_sq = vars
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| usage(format!("bad variance {s:?}"))))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    let model = MarkovModel1D::from_variances(k, sigma_sq)?;
    Ok((graph::optimal_line_graph(&model), Some(model)))
}

/// Same topology with every edge weight made positive and no self-loops.
fn positive_variant(g: &SignedGraph) -> anyhow::Result<SignedGraph> {
    let mut out = SignedGraph::new(g.n());
    for (i, j, w) in g.edges() {
        out.add_edge(i, j, w.abs())?;
    }
    if out.edge_count() == 0 {
        bail!("graph has no edges");
    }
    Ok(out)
}
