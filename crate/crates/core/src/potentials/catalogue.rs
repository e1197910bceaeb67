use std::fmt;
use std::sync::Arc;

use super::{
    make_delarue_terminal, make_logcosh_terminal, make_radial_terminal, InitialLaw, LogCoshProfile,
    ModelSpec, Potential, Quadratic, RunningCost, Zero,
};
use crate::numerics::{Matrix, Vector};
use crate::{Error, Result};

/// Named model families addressable from configuration text:
/// `quadratic(c)`, `logcosh(kappa)`, `delarue(delta,rho)`,
/// `radial_logcosh(kappa,d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFamily {
    /// `g = ½ c m²`, `f = 0`, tracking running cost.
    Quadratic { c: f64 },
    /// `g = −κ log cosh m`, `f = 0`, control-only running cost.
    LogCosh { kappa: f64 },
    /// Saturated linear coupling with threshold `r_δ`, tracking running
    /// cost. `rho = None` selects the default smoothing `r_δ/50`.
    Delarue { delta: f64, rho: Option<f64> },
    /// `g = −κ log cosh |m|` in dimension `dim`, control-only.
    RadialLogCosh { kappa: f64, dim: usize },
}

/// Model parameters shared by every family.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    /// Scalar drift `b` (the drift matrix is `b I`).
    pub drift: f64,
    pub sigma: f64,
    pub horizon: f64,
    /// Mean of the initial law; a single entry is broadcast to all axes.
    pub nu0: Vec<f64>,
    pub initial: InitialLaw,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            drift: 0.0,
            sigma: 1.0,
            horizon: 1.0,
            nu0: vec![0.0],
            initial: InitialLaw::default(),
        }
    }
}

impl ModelFamily {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) if text.ends_with(')') => (&text[..open], &text[open + 1..text.len() - 1]),
            _ => (text, ""),
        };
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(|| Error::InvalidParameter(format!("{name}: missing argument {}", i + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("{name}: {e}")))
        };
        let arity = |n: usize| -> Result<()> {
            if args.len() > n {
                Err(Error::InvalidParameter(format!("{name}: expected at most {n} arguments")))
            } else {
                Ok(())
            }
        };
        match name.trim() {
            "quadratic" => {
                arity(1)?;
                Ok(Self::Quadratic { c: num(0)? })
            }
            "logcosh" => {
                arity(1)?;
                Ok(Self::LogCosh { kappa: num(0)? })
            }
            "delarue" => {
                arity(2)?;
                let rho = if args.len() > 1 { Some(num(1)?) } else { None };
                Ok(Self::Delarue { delta: num(0)?, rho })
            }
            "radial_logcosh" => {
                arity(2)?;
                let d = num(1)?;
                if d.fract() != 0.0 || d < 1.0 {
                    return Err(Error::InvalidParameter(format!("radial_logcosh: bad dimension {d}")));
                }
                Ok(Self::RadialLogCosh { kappa: num(0)?, dim: d as usize })
            }
            other => Err(Error::InvalidParameter(format!("unknown model family '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::RadialLogCosh { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn build(&self, opts: &ModelOptions) -> Result<ModelSpec> {
        let d = self.dim();
        let nu0 = match opts.nu0.len() {
            1 => Vector::from_element(d, opts.nu0[0]),
            n if n == d => Vector::from_vec(opts.nu0.clone()),
            n => return Err(Error::DimensionMismatch { expected: d, got: n }),
        };
        let (running, g): (RunningCost, Arc<dyn Potential>) = match *self {
            Self::Quadratic { c } => (RunningCost::Tracking, Arc::new(Quadratic::isotropic(1, c)?)),
            Self::LogCosh { kappa } => (RunningCost::ControlOnly, Arc::new(make_logcosh_terminal(kappa)?)),
            Self::Delarue { delta, rho } => (
                RunningCost::Tracking,
                Arc::new(make_delarue_terminal(opts.drift, opts.horizon, delta, rho)?),
            ),
            Self::RadialLogCosh { kappa, dim } => {
                if !(kappa > 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "radial log-cosh needs kappa > 2, got {kappa}"
                    )));
                }
                (
                    RunningCost::ControlOnly,
                    Arc::new(make_radial_terminal(Arc::new(LogCoshProfile { kappa }), dim)?),
                )
            }
        };
        let spec = ModelSpec {
            name: self.to_string(),
            drift: Matrix::identity(d, d) * opts.drift,
            sigma: opts.sigma,
            horizon: opts.horizon,
            running,
            f: Arc::new(Zero::new(d)),
            g,
            nu0,
            initial: opts.initial,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic { c } => write!(f, "quadratic({c})"),
            Self::LogCosh { kappa } => write!(f, "logcosh({kappa})"),
            Self::Delarue { delta, rho: Some(rho) } => write!(f, "delarue({delta},{rho})"),
            Self::Delarue { delta, rho: None } => write!(f, "delarue({delta})"),
            Self::RadialLogCosh { kappa, dim } => write!(f, "radial_logcosh({kappa},{dim})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips_names() {
        for text in ["quadratic(1)", "logcosh(4)", "delarue(0.1,0.002)", "delarue(0.1)", "radial_logcosh(4,2)"] {
            let fam = ModelFamily::parse(text).unwrap();
            assert_eq!(fam.to_string(), text);
        }
        assert!(ModelFamily::parse("cubic(1)").is_err());
        assert!(ModelFamily::parse("logcosh()").is_err());
        assert!(ModelFamily::parse("logcosh(4,5)").is_err());
        assert!(ModelFamily::parse("radial_logcosh(4,1.5)").is_err());
    }

    #[test]
    fn build_checks_parameters() {
        let opts = ModelOptions::default();
        assert!(ModelFamily::LogCosh { kappa: 1.5 }.build(&opts).is_err());
        let s = ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }.build(&opts).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.nu0, Vector::zeros(2));
        assert_eq!(s.running, RunningCost::ControlOnly);
        let bad = ModelOptions { nu0: vec![0.0, 1.0, 2.0], ..opts };
        assert!(ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }.build(&bad).is_err());
    }
}
