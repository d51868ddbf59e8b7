use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use nbekcf::eval::summarize;
use nbekcf::io::{list_sequence, load_groundtruth, load_image, write_metrics, write_results};
use nbekcf::tracker::{track_sequence, TrackerConfig};

use crate::{usage_error, TrackArgs};

pub fn run(args: TrackArgs) -> Result<ExitCode> {
    let cfg = TrackerConfig {
        cell_size: args.cell,
        kernel: args.kernel,
        sigma: args.sigma,
        lambda: args.lambda,
        gamma: args.gamma,
        search_factor: args.search_factor,
        scale_steps: args.scale_steps,
        ..TrackerConfig::default()
    };
    if let Err(e) = cfg.validate() {
        usage_error(e);
    }

    let paths = list_sequence(&args.seq)?;
    if paths.is_empty() {
        bail!("no frames in {}", args.seq.display());
    }
    let gt = args.gt.as_ref().map(load_groundtruth).transpose()?;
    if let Some(gt) = &gt {
        if gt.len() != paths.len() {
            bail!("{} ground-truth boxes for {} frames", gt.len(), paths.len());
        }
    }

    let start = Instant::now();
    let boxes = track_sequence(paths.iter().map(load_image), &args.init, &cfg)
        .with_context(|| format!("tracking {}", args.seq.display()))?;
    let secs = start.elapsed().as_secs_f64();

    write_results(&args.out, &boxes)?;
    if let Some(gt) = &gt {
        let metrics = summarize(&boxes, gt)?;
        println!(
            "center error {:.3} px, DP@20 {:.3}, OP@0.5 {:.3}, AUC {:.3}",
            metrics.mean_center_error, metrics.distance_precision, metrics.overlap_precision, metrics.auc
        );
        if let Some(path) = &args.metrics {
            write_metrics(path, &metrics)?;
        }
    }
    println!("{} frames, mean fps {:.1}", boxes.len(), boxes.len() as f64 / secs.max(1e-9));
    Ok(ExitCode::SUCCESS)
}
