//! Run manifests in plain `key = value` text.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `experiments` | comma-separated experiment names | all |
//! | `n` | grid points per side (power of two) | 256 |
//! | `L` | box side length | 200 |
//! | `mu`, `lambda` | viscosities | 1, 0 |
//! | `rho_star` | equilibrium density | 1 |
//! | `gamma` | isentropic exponent of `P(ρ) = ρ^γ/γ` | 1.4 |
//! | `epsilon` | initial-data amplitude | 0.01 |
//! | `dt` | time step of nonlinear runs | largest power of two under the CFL bound |
//! | `T` | horizon override for nonlinear runs | per experiment |
//! | `output` | output directory | `cnslab-out` |
//! | `seed` | seed of random test states | 0 |
//! | `threads` | worker threads, 0 for all cores | 0 |

use std::io::Write;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::harness::{
    ensure_writable, find, registry, write_outputs, ExperimentContext, RunMetadata,
};
use crate::profiles::{FluidParams, PressureLaw};
use crate::solver::cfl_bound;
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Empty means every registered experiment.
    pub experiments: Vec<String>,
    pub grid: Grid,
    pub params: FluidParams,
    pub epsilon: f64,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub output: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunManifest {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl RunManifest {
    pub fn context(&self) -> ExperimentContext {
        ExperimentContext {
            grid: self.grid,
            params: self.params,
            epsilon: self.epsilon,
            dt: self.dt,
            t_end: self.t_end,
            seed: self.seed,
        }
    }
}

/// Runs the manifest's experiments on a pool of `threads` workers, prints one
/// summary line per report to `log` and writes the output files.
///
/// Returns whether every report passed. Experiments that error are reported
/// on `log` and count as failures; the remaining experiments still run.
pub fn run(manifest: &RunManifest, log: &mut (dyn Write + Send)) -> Result<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let experiments = if manifest.experiments.is_empty() {
        registry().iter().collect::<Vec<_>>()
    } else {
        manifest
            .experiments
            .iter()
            .map(|n| find(n))
            .collect::<Result<Vec<_>>>()?
    };
    ensure_writable(&manifest.output)?;
    let ctx = manifest.context();
    let mut ok = true;
    let mut outputs = Vec::new();
    for exp in experiments {
        match pool.install(|| exp.run(&ctx)) {
            Ok(out) => {
                for r in &out.reports {
                    writeln!(log, "{}", r.summary_line())?;
                }
                ok &= out.all_pass();
                outputs.push((exp.name.to_string(), out));
            }
            Err(e) => {
                writeln!(log, "ERROR {}: {e}", exp.name)?;
                ok = false;
            }
        }
    }
    let metadata = RunMetadata {
        n: manifest.grid.n(),
        length: manifest.grid.length(),
        params: manifest.params,
        epsilon: manifest.epsilon,
        threads: pool.current_num_threads(),
        seed: manifest.seed,
    };
    write_outputs(&manifest.output, &outputs, &metadata)?;
    Ok(ok)
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(key, format!("must be positive, got {value}")))
    }
}

pub fn parse_config(text: &str) -> Result<RunManifest> {
    let mut experiments = Vec::new();
    let mut n = 256usize;
    let mut length = 200.0;
    let (mut mu, mut lambda, mut rho_star, mut gamma) = (1.0, 0.0, 1.0, 1.4);
    let mut epsilon = 1e-2;
    let mut dt = None;
    let mut t_end = None;
    let mut output = PathBuf::from("cnslab-out");
    let mut seed = 0u64;
    let mut threads = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                line,
                format!("line {} is not `key = value`", lineno + 1),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "experiments" => {
                experiments = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "n" => n = number(key, value)?,
            "L" => length = number(key, value)?,
            "mu" => mu = number(key, value)?,
            "lambda" => lambda = number(key, value)?,
            "rho_star" => rho_star = number(key, value)?,
            "gamma" => gamma = number(key, value)?,
            "epsilon" => epsilon = positive(key, number(key, value)?)?,
            "dt" => dt = Some(positive(key, number(key, value)?)?),
            "T" => t_end = Some(positive(key, number(key, value)?)?),
            "output" => output = PathBuf::from(value),
            "seed" => seed = number(key, value)?,
            "threads" => threads = number(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
    }

    let grid = Grid::new(n, length).map_err(|e| {
        let key = if matches!(e, Error::GridSize(_)) {
            "n"
        } else {
            "L"
        };
        Error::config(key, e.to_string())
    })?;
    if !(gamma >= 1.0) {
        return Err(Error::config(
            "gamma",
            "isentropic exponent must be at least 1",
        ));
    }
    let params =
        FluidParams::new(mu, lambda, rho_star, PressureLaw::isentropic(gamma)).map_err(|e| {
            let key = if !(mu > 0.0) {
                "mu"
            } else if !(rho_star > 0.0) {
                "rho_star"
            } else {
                "lambda"
            };
            Error::config(key, e.to_string())
        })?;
    if let Some(dt) = dt {
        let bound = cfl_bound(&grid, &params);
        if dt > bound {
            return Err(Error::config(
                "dt",
                format!("{dt} exceeds the CFL bound {bound}"),
            ));
        }
    }
    for name in &experiments {
        find(name).map_err(|e| Error::config("experiments", e.to_string()))?;
    }
    Ok(RunManifest {
        experiments,
        grid,
        params,
        epsilon,
        dt,
        t_end,
        output,
        seed,
        threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let m = parse_config("").unwrap();
        assert_eq!(m.grid.n(), 256);
        assert_eq!(m.grid.length(), 200.0);
        assert_eq!(m.params, FluidParams::default());
        assert_eq!(m.epsilon, 1e-2);
        assert!(m.dt.is_none() && m.experiments.is_empty());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of("lambda = -3\nmu = 1"), "lambda");
        assert_eq!(key_of("n = 100"), "n");
        assert_eq!(key_of("colour = red"), "colour");
        assert_eq!(key_of("experiments = kernel-rates, bogus"), "experiments");
        assert_eq!(key_of("dt = 10"), "dt");
        assert_eq!(key_of("epsilon = abc"), "epsilon");
    }

    #[test]
    fn comments_and_lists() {
        let m = parse_config("# run\nexperiments = hf-decay, kernel-algebra # two\n\nthreads=2\n")
            .unwrap();
        assert_eq!(m.experiments, vec!["hf-decay", "kernel-algebra"]);
        assert_eq!(m.threads, 2);
    }
}
