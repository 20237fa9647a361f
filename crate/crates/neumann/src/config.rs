//! JSON run configuration.
//!
//! Lengths may be given for a domain of any size; they are divided by the
//! outer radius so the kernels always see the unit disk, annulus or ball.

use std::path::Path;

use neumann_core::geometry::symmetric_angles;
use neumann_core::{Circle, Configuration, Domain, PointSet, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Disk,
    Annulus,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Outer radius (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Inner radius of the annulus in the same units as `radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
    /// Inner radius of the unit annulus; alternative to `inner`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Dimension; required for balls, 2 (or absent) otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
}

impl DomainSpec {
    /// The normalized domain and the outer radius.
    pub fn resolve(&self) -> Result<(Domain, f64), CliError> {
        let scale = self.radius.unwrap_or(1.0);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CliError::Config(format!("radius must be positive, got {scale}")));
        }
        let domain = match self.kind {
            DomainKind::Disk => {
                self.planar_only("disk")?;
                if self.inner.is_some() || self.mu.is_some() {
                    return Err(CliError::Config("a disk has no inner radius".into()));
                }
                Domain::Disk
            }
            DomainKind::Annulus => {
                self.planar_only("annulus")?;
                let mu = match (self.mu, self.inner) {
                    (Some(mu), None) => mu,
                    (None, Some(inner)) => inner / scale,
                    _ => return Err(CliError::Config("annulus needs exactly one of `mu` and `inner`".into())),
                };
                Domain::annulus(mu).map_err(CliError::config)?
            }
            DomainKind::Ball => {
                if self.inner.is_some() || self.mu.is_some() {
                    return Err(CliError::Config("a ball has no inner radius".into()));
                }
                let d = self.d.ok_or_else(|| CliError::Config("ball needs a dimension `d`".into()))?;
                Domain::ball(d).map_err(CliError::config)?
            }
        };
        Ok((domain, scale))
    }

    fn planar_only(&self, what: &str) -> Result<(), CliError> {
        match self.d {
            None | Some(2) => Ok(()),
            Some(d) => Err(CliError::Config(format!(
                "no {what} kernel in dimension {d}: the {what} is supported in the plane only (use kind \"ball\" for d >= 3)"
            ))),
        }
    }
}

/// Parses `disk`, `annulus:<mu>`, `annulus<mu>` or `ball<d>`.
pub fn parse_domain(label: &str) -> Result<Domain, CliError> {
    let bad = || CliError::Usage(format!("unknown domain `{label}`; expected disk, annulus:<mu> or ball<d>"));
    if label == "disk" {
        return Ok(Domain::Disk);
    }
    if let Some(rest) = label.strip_prefix("annulus") {
        let mu: f64 = rest.trim_start_matches(':').parse().map_err(|_| bad())?;
        return Domain::annulus(mu).map_err(|e| CliError::Usage(e.to_string()));
    }
    if let Some(rest) = label.strip_prefix("ball") {
        let d: u32 = rest.trim_start_matches(':').parse().map_err(|_| bad())?;
        return Domain::ball(d).map_err(|e| CliError::Usage(e.to_string()));
    }
    Err(bad())
}

/// Tolerance overrides; absent entries take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplacian: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_derivative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<f64>,
}

impl Tolerances {
    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("tolerance override `{assignment}` is not key=value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("tolerance `{key}` has a non-numeric value `{value}`")))?;
        if !(v >= 0.0) {
            return Err(CliError::Usage(format!("tolerance `{key}` must be non-negative")));
        }
        let slot = match key.trim() {
            "tol_gap" => &mut self.tol_gap,
            "min_gap" => &mut self.min_gap,
            "search_tol" => &mut self.search_tol,
            "laplacian" => &mut self.laplacian,
            "flux" => &mut self.flux,
            "mean" => &mut self.mean,
            "fourier" => &mut self.fourier,
            "theta" => &mut self.theta,
            "theta_derivative" => &mut self.theta_derivative,
            "dirichlet" => &mut self.dirichlet,
            other => return Err(CliError::Usage(format!("unknown tolerance `{other}`"))),
        };
        *slot = Some(v);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub circles: Vec<Circle>,
    /// Number of half-planes when `angles` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    /// Explicit point set, used by `energy` and `kernel-eval` instead of
    /// the circles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A configuration mapped onto the unit domain.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub domain: Domain,
    /// Outer radius the lengths were divided by.
    pub scale: f64,
    pub configuration: Option<Configuration>,
    pub explicit: Option<(PointSet, Vec<f64>)>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Normalizes lengths and builds the configuration and/or point set.
    /// `scheme` overrides a missing scheme; a conflicting one is an error.
    pub fn resolve(&self, scheme: Option<Scheme>) -> Result<Resolved, CliError> {
        let (domain, scale) = self.domain.resolve()?;
        let d = domain.dim();
        let scheme = match (self.scheme, scheme) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!(
                    "config scheme {} conflicts with requested {}",
                    a.label(),
                    b.label()
                )))
            }
            (a, b) => a.or(b),
        };
        let configuration = if self.circles.is_empty() {
            None
        } else {
            let scheme = scheme.ok_or_else(|| CliError::Config("circles need a `scheme`".into()))?;
            let circles: Vec<Circle> = self
                .circles
                .iter()
                .map(|c| {
                    let x_prime0 = if c.x_prime0.is_empty() && d > 2 {
                        vec![0.0; d - 2]
                    } else {
                        c.x_prime0.iter().map(|v| v / scale).collect()
                    };
                    Circle::new(c.r0 / scale, x_prime0, c.magnitude)
                })
                .collect();
            let angles = match (&self.angles, self.m) {
                (Some(a), None) => a.clone(),
                (None, Some(m)) => symmetric_angles(m),
                (Some(a), Some(m)) if a.len() == m => a.clone(),
                (Some(a), Some(m)) => {
                    return Err(CliError::Config(format!("m = {m} but {} angles are given", a.len())))
                }
                (None, None) => return Err(CliError::Config("circles need `m` or `angles`".into())),
            };
            Some(Configuration::new(domain, circles, angles, scheme).map_err(CliError::config)?)
        };
        let explicit = match (&self.points, &self.charges) {
            (Some(p), Some(q)) => {
                if p.len() != q.len() {
                    return Err(CliError::Config(format!("{} points but {} charges", p.len(), q.len())));
                }
                let pts = PointSet::from_points(d, p.iter().map(|x| x.iter().map(|v| v / scale).collect::<Vec<f64>>()))
                    .map_err(CliError::config)?;
                for x in pts.iter() {
                    if !domain.contains(x) {
                        return Err(CliError::Config(format!("point {x:?} (normalized) is outside {}", domain.label())));
                    }
                }
                Some((pts, q.clone()))
            }
            (None, None) => None,
            _ => return Err(CliError::Config("`points` and `charges` go together".into())),
        };
        Ok(Resolved {
            domain,
            scale,
            configuration,
            explicit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescales_to_the_unit_domain() {
        let cfg = RunConfig::from_json(
            r#"{"domain": {"kind": "annulus", "radius": 2.0, "inner": 0.6},
                "scheme": "theorem1",
                "circles": [{"r0": 1.0, "magnitude": 1.0}, {"r0": 1.6, "magnitude": -1.0}],
                "m": 3}"#,
        )
        .unwrap();
        let r = cfg.resolve(None).unwrap();
        assert_eq!(r.domain, Domain::annulus(0.3).unwrap());
        let c = r.configuration.unwrap();
        assert_eq!(c.circles[0].r0, 0.5);
        assert_eq!(c.circles[1].r0, 0.8);
        assert_eq!(r.scale, 2.0);
    }

    #[test]
    fn rejects_a_spatial_annulus() {
        let cfg = RunConfig::from_json(r#"{"domain": {"kind": "annulus", "mu": 0.3, "d": 3}}"#).unwrap();
        let err = cfg.resolve(None).unwrap_err();
        assert!(err.to_string().contains("plane only"), "{err}");
    }

    #[test]
    fn domain_labels() {
        assert_eq!(parse_domain("disk").unwrap(), Domain::Disk);
        assert_eq!(parse_domain("annulus:0.3").unwrap(), Domain::annulus(0.3).unwrap());
        assert_eq!(parse_domain("annulus0.5").unwrap(), Domain::annulus(0.5).unwrap());
        assert_eq!(parse_domain("ball7").unwrap(), Domain::ball(7).unwrap());
        assert!(parse_domain("ball2").is_err());
        assert!(parse_domain("cube").is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("tol_gap=1e-8").unwrap();
        assert_eq!(t.tol_gap, Some(1e-8));
        assert!(t.set("nope=1").is_err());
        assert!(t.set("tol_gap").is_err());
        assert!(RunConfig::from_json(r#"{"domain": {"kind": "disk"}, "extra": 1}"#).is_err());
    }

    #[test]
    fn scheme_conflicts_are_errors() {
        let cfg = RunConfig::from_json(
            r#"{"domain": {"kind": "disk"}, "scheme": "theorem2",
                "circles": [{"r0": 0.5, "magnitude": 1.0}], "m": 2}"#,
        )
        .unwrap();
        assert!(cfg.resolve(Some(Scheme::Theorem1)).is_err());
        assert!(cfg.resolve(Some(Scheme::Theorem2)).is_ok());
    }
}
