//! Fourier-analysis curves for fig1..fig5 and custom sweeps.

use helmwave_core::lfa::{
    amplification_experiment, amplification_thetas, auto_sigma, optimal_sigma, smoother_curve, spectral_radius_sweep, threelevel_block, twolevel_block, AmplificationSmoother, CoarsePenalty, LfaSmoother, Stencil, SymbolParams, Variant,
};
use helmwave_core::Result;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{CoarseSigma, Experiment, ExperimentConfig};

/// One CSV line: `theta0,rho,variant,t,sigma_re,sigma_im,omega,beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta0: f64,
    pub rho: f64,
    /// Variant of a cycle sweep, or the smoother name of a smoothing curve.
    pub variant: String,
    pub t: f64,
    pub sigma: Complex64,
    pub omega: f64,
    /// Only set for shifted-Laplacian curves.
    pub beta: Option<f64>,
}

/// A curve to compute, described before any work is done.
#[derive(Debug, Clone)]
enum Curve {
    /// `|S(theta)|` of one relaxation on `(-pi, pi]`.
    Smoother { t: f64, sigma: Complex64, smoother: LfaSmoother },
    /// One-step amplification on the 1D Dirichlet problem with `kappa = 200`, `h = t / 200`.
    Amplification { t: f64, sigma: Complex64, smoother: AmplificationSmoother },
    /// Spectral radius of a two- or three-level block over the low frequencies.
    Cycle { levels: usize, variant: Variant, label: String, params: SymbolParams },
}

#[derive(Debug, Clone)]
pub struct FigurePlan {
    curves: Vec<Curve>,
    samples: usize,
    omega: f64,
}

fn cycle(levels: usize, variant: Variant, t: f64, sigma: Complex64, coarse: CoarsePenalty, omega: f64, beta: f64) -> Curve {
    let mut params = SymbolParams::new(t, sigma);
    params.coarse_penalty = coarse;
    params.omega = omega;
    params.beta = beta;
    Curve::Cycle {
        levels,
        variant,
        label: variant.name().into(),
        params,
    }
}

impl FigurePlan {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let omega = cfg.omega.unwrap_or(0.6);
        let samples = cfg.samples.unwrap_or(257);
        let mut curves = Vec::new();
        match cfg.experiment() {
            Experiment::Fig(1) => {
                for t in cfg.t.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0]) {
                    let sigma = cfg.sigma.map_or_else(|| optimal_sigma(t), Ok)?;
                    curves.push(Curve::Smoother { t, sigma, smoother: LfaSmoother::Jacobi });
                    curves.push(Curve::Smoother {
                        t,
                        sigma,
                        smoother: LfaSmoother::GaussSeidel,
                    });
                }
            }
            Experiment::Fig(2) => {
                let t = 0.8;
                let sigma = cfg.sigma.map_or_else(|| optimal_sigma(t), Ok)?;
                for smoother in [AmplificationSmoother::GaussSeidel, AmplificationSmoother::Jacobi { omega }, AmplificationSmoother::Gmres { m: 1 }] {
                    curves.push(Curve::Amplification { t, sigma, smoother });
                }
            }
            Experiment::Fig(3) => {
                let t = 0.8;
                let base = optimal_sigma(t)?;
                for beta in [0.5, 0.3, 0.1] {
                    curves.push(cycle(2, Variant::SL, t, Complex64::new(0.0, 0.0), CoarsePenalty::Same, omega, beta));
                    if let Some(Curve::Cycle { label, .. }) = curves.last_mut() {
                        *label = format!("SL(beta={beta})");
                    }
                }
                let fine = base + Complex64::new(0.0, 0.01);
                curves.push(cycle(2, Variant::FC, t, fine, CoarsePenalty::Auto, omega, 0.0));
                curves.push(cycle(2, Variant::C, t, fine, CoarsePenalty::Auto, omega, 0.0));
                // Right panel: variant C for several penalties.
                for shift in [0.01, 0.05, 0.1] {
                    curves.push(cycle(2, Variant::C, t, base + Complex64::new(0.0, shift), CoarsePenalty::Auto, omega, 0.0));
                }
            }
            Experiment::Fig(4) => {
                for t in [3f64.sqrt(), 4.0] {
                    curves.push(cycle(2, Variant::SL, t, Complex64::new(0.0, 0.0), CoarsePenalty::Same, omega, 0.8));
                    curves.push(cycle(2, Variant::C, t, Complex64::new(0.0, 0.8), CoarsePenalty::Same, omega, 0.0));
                }
            }
            Experiment::Fig(5) => {
                for t in [0.6, 0.4, 0.2] {
                    curves.push(cycle(3, Variant::C, t, auto_sigma(t)?, CoarsePenalty::Auto, omega, 0.0));
                }
                let t = 0.4;
                let sigma = auto_sigma(t)?;
                curves.push(cycle(3, Variant::SL, t, Complex64::new(0.0, 0.0), CoarsePenalty::Same, omega, 0.5));
                curves.push(cycle(3, Variant::C, t, sigma, CoarsePenalty::Auto, omega, 0.0));
                for repeats in [1, 2] {
                    let mut c = cycle(3, Variant::FC, t, sigma, CoarsePenalty::Auto, omega, 0.0);
                    if let Curve::Cycle { params, label, .. } = &mut c {
                        params.level1_repeats = repeats;
                        *label = format!("FC(repeats={repeats})");
                    }
                    curves.push(c);
                }
            }
            Experiment::Custom => curves = custom_curves(cfg, omega)?,
            other => unreachable!("{other} is not a Fourier-analysis experiment"),
        }
        Ok(Self { curves, samples, omega })
    }

    pub fn manifest(&self) -> Value {
        let curves: Vec<Value> = self
            .curves
            .iter()
            .map(|c| match c {
                Curve::Smoother { t, sigma, smoother } => json!({"kind": "smoother", "smoother": format!("{smoother:?}"), "t": t, "sigma": [sigma.re, sigma.im]}),
                Curve::Amplification { t, sigma, smoother } => json!({"kind": "amplification", "smoother": smoother.name(), "t": t, "sigma": [sigma.re, sigma.im], "kappa": 200.0}),
                Curve::Cycle { levels, label, params, .. } => json!({
                    "kind": format!("{levels}-level"),
                    "variant": label,
                    "t": params.t,
                    "sigma": [params.sigma.re, params.sigma.im],
                    "coarse_penalty": format!("{:?}", params.coarse_penalty),
                    "beta": params.beta,
                    "mu": params.mu,
                    "sweeps": params.sweeps,
                    "level1_repeats": params.level1_repeats,
                    "smoother": format!("{:?}", params.smoother),
                }),
            })
            .collect();
        json!({"samples": self.samples, "omega": self.omega, "curves": curves})
    }

    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let mut rows = Vec::new();
        for curve in &self.curves {
            match curve {
                Curve::Smoother { t, sigma, smoother } => {
                    let name = match smoother {
                        LfaSmoother::Jacobi => "jacobi",
                        LfaSmoother::GaussSeidel => "gs",
                    };
                    for (theta, v) in smoother_curve(&Stencil::cip(*t, *sigma), *smoother, self.omega, self.samples)? {
                        rows.push(SweepRow {
                            theta0: theta,
                            rho: v,
                            variant: name.into(),
                            t: *t,
                            sigma: *sigma,
                            omega: self.omega,
                            beta: None,
                        });
                    }
                }
                Curve::Amplification { t, sigma, smoother } => {
                    let kappa = 200.0;
                    let thetas = amplification_thetas(self.samples);
                    for (theta, v) in amplification_experiment(kappa, t / kappa, *sigma, *smoother, &thetas)? {
                        rows.push(SweepRow {
                            theta0: theta,
                            rho: v,
                            variant: smoother.name(),
                            t: *t,
                            sigma: *sigma,
                            omega: self.omega,
                            beta: None,
                        });
                    }
                }
                Curve::Cycle { levels, variant, label, params } => {
                    let v = *variant;
                    let sweep = if *levels == 2 {
                        spectral_radius_sweep(|th, p| twolevel_block(th, p, v), params, self.samples)?
                    } else {
                        spectral_radius_sweep(|th, p| threelevel_block(th, p, v), params, self.samples)?
                    };
                    for pt in sweep.points {
                        rows.push(SweepRow {
                            theta0: pt.theta0,
                            rho: pt.rho,
                            variant: label.clone(),
                            t: params.t,
                            sigma: params.sigma,
                            omega: params.omega,
                            beta: (v == Variant::SL).then_some(params.beta),
                        });
                    }
                }
            }
        }
        Ok(rows)
    }
}

fn custom_curves(cfg: &ExperimentConfig, omega: f64) -> Result<Vec<Curve>> {
    let levels = cfg.lfa_levels.unwrap_or(2);
    let mut curves = Vec::new();
    for t in cfg.t.clone().unwrap_or_else(|| vec![0.8]) {
        for &variant in cfg.variant.as_deref().unwrap_or(&[Variant::C]) {
            let sigma = match (variant, cfg.sigma) {
                (Variant::SL, _) => Complex64::new(0.0, 0.0),
                (_, Some(s)) => s,
                (_, None) => auto_sigma(t)?,
            };
            let mut params = SymbolParams::new(t, sigma);
            params.omega = omega;
            params.beta = cfg.beta.unwrap_or(0.5);
            params.smoother = cfg.smoother.unwrap_or(LfaSmoother::Jacobi);
            params.sweeps = cfg.sweeps.unwrap_or(1);
            params.level1_repeats = cfg.repeats.unwrap_or(1);
            if let Some(mu) = cfg.mu {
                params.mu = [mu; 3];
            }
            params.coarse_penalty = match cfg.coarse_sigma.clone().unwrap_or(CoarseSigma::Auto) {
                CoarseSigma::Same => CoarsePenalty::Same,
                CoarseSigma::Auto => CoarsePenalty::Auto,
                CoarseSigma::Given(v) => CoarsePenalty::Given(v),
            };
            params.validate()?;
            curves.push(Curve::Cycle {
                levels,
                variant,
                label: variant.name().into(),
                params,
            });
        }
    }
    Ok(curves)
}
