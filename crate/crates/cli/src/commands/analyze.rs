use std::path::PathBuf;

use burstkernel::kernels::{basis_singular_values, Clustering};
use burstkernel::png::write_label_png;
use burstkernel::{
    basis_rank, clamp_renormalize, cluster_coefficients, compress_kernel_field, estimate_kernels_nlm, overlap_ratio,
    Burst, KernelBasis, KernelField, NlmConfig, TensorCodec,
};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::noise::{resolve, NoiseArgs};
use crate::output::write_json;

/// Basis rank and shared-subspace statistics across bursts.
#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    /// Noisy burst tensors; at least two unless --kmeans is given.
    #[arg(required = true)]
    pub bursts: Vec<PathBuf>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub ksize: Option<usize>,
    #[arg(long)]
    pub patch_radius: Option<usize>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Basis size B per burst.
    #[arg(long = "basis", alias = "B")]
    pub basis: Option<usize>,
    /// Cluster each burst's coefficients into this many groups and write a
    /// label map.
    #[arg(long)]
    pub kmeans: Option<usize>,
    #[arg(long)]
    pub kmeans_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for analysis.json and label maps.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BurstStats {
    path: String,
    rank: usize,
    /// Rank after clamping and renormalizing every basis element.
    rank_normalized: usize,
    singular_values: Vec<f64>,
    wcss: Option<f64>,
    label_map: Option<String>,
}

#[derive(Serialize)]
struct PairStats {
    a: usize,
    b: usize,
    pair_rank: usize,
    overlap_ratio: f64,
    pair_rank_normalized: usize,
    overlap_ratio_normalized: f64,
}

#[derive(Serialize)]
struct Analysis {
    ksize: usize,
    basis: usize,
    rank: Vec<usize>,
    bursts: Vec<BurstStats>,
    pairs: Vec<PairStats>,
    pair_rank: Vec<usize>,
    overlap_ratio: Vec<f64>,
    mean_overlap_ratio: Option<f64>,
    mean_overlap_ratio_normalized: Option<f64>,
    wcss: Option<Vec<f64>>,
}

fn normalized_basis(basis: &KernelBasis<f64>) -> CliResult<KernelBasis<f64>> {
    let shape = basis.shape();
    let as_field = KernelField::new(1, basis.len(), shape, basis.as_slice().to_vec(), false)?;
    let clamped = clamp_renormalize(&as_field);
    Ok(KernelBasis::new(shape, basis.len(), clamped.into_weights(), true)?)
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = v.len();
    (n > 0).then(|| v.sum::<f64>() / n as f64)
}

pub fn run(args: &AnalyzeArgs, cfg: &Config) -> CliResult<()> {
    let kmeans = cfg.pick_opt(args.kmeans, "kmeans")?;
    if args.bursts.len() < 2 && kmeans.is_none() {
        return Err(CliError::Usage("pairwise statistics need at least two bursts (or pass --kmeans)".into()));
    }
    if kmeans == Some(0) {
        return Err(CliError::Usage("--kmeans must be at least 1".into()));
    }
    let d = NlmConfig::default();
    let nlm = NlmConfig {
        ksize: cfg.pick(args.ksize, "ksize", d.ksize)?,
        patch_radius: cfg.pick(args.patch_radius, "patch_radius", d.patch_radius)?,
        bandwidth: cfg.pick(args.bandwidth, "bandwidth", d.bandwidth)?,
        per_channel: cfg.pick(None, "per_channel", d.per_channel)?,
    };
    let b = cfg.pick(args.basis, "basis", 90)?;
    let iters = cfg.pick(args.kmeans_iters, "kmeans_iters", 100)?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    std::fs::create_dir_all(&args.out)?;

    let mut bases = Vec::new();
    let mut stats = Vec::new();
    for (i, path) in args.bursts.iter().enumerate() {
        let noisy = Burst::<f64>::load(path)?;
        let noise = resolve(&args.noise, None, cfg, Some(path), None)?.ok_or_else(|| {
            CliError::Usage(format!(
                "no noise parameters for {}: pass --gain or --sigma-r/--sigma-s, or keep metadata.json next to it",
                path.display()
            ))
        })?;
        let field = estimate_kernels_nlm(&noisy, &noise.params()?, &nlm)?;
        let compressed = compress_kernel_field(&field, b)?;
        let basis = compressed.basis;
        let normalized = normalized_basis(&basis)?;

        let (wcss, label_map) = match kmeans {
            Some(k) => {
                let c: Clustering = cluster_coefficients(&compressed.coeffs, k, iters, seed)?;
                let name = format!("labels_{i}.png");
                write_label_png(&c.labels, c.height, c.width, args.out.join(&name))?;
                (Some(c.wcss), Some(name))
            }
            None => (None, None),
        };
        stats.push(BurstStats {
            path: path.display().to_string(),
            rank: basis_rank(&basis, burstkernel::kernels::DEFAULT_RANK_TOL)?,
            rank_normalized: basis_rank(&normalized, burstkernel::kernels::DEFAULT_RANK_TOL)?,
            singular_values: basis_singular_values(&basis)?,
            wcss,
            label_map,
        });
        bases.push((basis, normalized));
    }

    let mut pairs = Vec::new();
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let raw = overlap_ratio(&bases[i].0, &bases[j].0)?;
            let norm = overlap_ratio(&bases[i].1, &bases[j].1)?;
            pairs.push(PairStats {
                a: i,
                b: j,
                pair_rank: raw.pair_rank,
                overlap_ratio: raw.ratio,
                pair_rank_normalized: norm.pair_rank,
                overlap_ratio_normalized: norm.ratio,
            });
        }
    }

    let analysis = Analysis {
        ksize: nlm.ksize,
        basis: b,
        rank: stats.iter().map(|s| s.rank).collect(),
        pair_rank: pairs.iter().map(|p| p.pair_rank).collect(),
        overlap_ratio: pairs.iter().map(|p| p.overlap_ratio).collect(),
        mean_overlap_ratio: mean(pairs.iter().map(|p| p.overlap_ratio)),
        mean_overlap_ratio_normalized: mean(pairs.iter().map(|p| p.overlap_ratio_normalized)),
        wcss: kmeans.map(|_| stats.iter().filter_map(|s| s.wcss).collect()),
        bursts: stats,
        pairs,
    };
    write_json(&args.out.join("analysis.json"), &analysis)
}
