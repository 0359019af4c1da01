use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use lightcone_core::catalog::{paraboloid_graph, product_cylinder, round_sphere};
use lightcone_core::harmonics::HarmonicSpec;
use lightcone_core::minkowski::MinkowskiVec;
use lightcone_core::transform::{expand, ScalarField};
use lightcone_core::verify::Reference;
use lightcone_core::SurfacePatch;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// {x : <x,x> = 0, <u,x> = r}
    RoundSphere,
    /// (cosh x, sinh x, cos y, sin y)
    Cylinder,
    /// ((|x|^2+1)/2, (|x|^2-1)/2, x, y)
    Paraboloid,
    /// e^sigma times the round sphere, sigma read from --spec
    Perturbed,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(value_enum)]
    pub surface: SurfaceKind,
    /// Sphere radius
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Unit timelike past-pointing observer
    #[arg(
        long,
        num_args = 4,
        allow_negative_numbers = true,
        value_names = ["U0", "U1", "U2", "U3"],
        default_values_t = [-1.0, 0.0, 0.0, 0.0]
    )]
    pub u: Vec<f64>,
    /// JSON array of [l, m, amplitude] triples (perturbed only)
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct SurfaceEcho {
    pub surface: SurfaceKind,
    pub r: f64,
    pub u: Vec<f64>,
    pub spec: Option<HarmonicSpec>,
}

pub struct Selected {
    pub patch: SurfacePatch,
    pub reference: Option<Reference>,
    pub echo: SurfaceEcho,
}

/// Parses a spec file; syntax errors carry line and column.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Config(format!("{}: {e}", path.display()))
    })
}

impl SurfaceArgs {
    pub fn build(&self) -> Result<Selected, Failure> {
        let u = MinkowskiVec::new(self.u[0], self.u[1], self.u[2], self.u[3]);
        let geometry = |e: lightcone_core::GeometryError| Failure::Input(e.to_string());
        if self.spec.is_some() && self.surface != SurfaceKind::Perturbed {
            return Err(Failure::Config("--spec only applies to the perturbed surface".into()));
        }
        let mut spec = None;
        let (patch, reference) = match self.surface {
            SurfaceKind::RoundSphere => (round_sphere(&u, self.r).map_err(geometry)?, Some(Reference::RoundSphere { r: self.r })),
            SurfaceKind::Cylinder => (product_cylinder(), Some(Reference::Cylinder)),
            SurfaceKind::Paraboloid => (paraboloid_graph(), Some(Reference::Paraboloid)),
            SurfaceKind::Perturbed => {
                let path = self
                    .spec
                    .as_ref()
                    .ok_or_else(|| Failure::Config("the perturbed surface needs --spec FILE".into()))?;
                let s: HarmonicSpec = read_json(path)?;
                s.validate().map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                let mut patch = expand(&round_sphere(&u, self.r).map_err(geometry)?, &ScalarField::from_spec(&s));
                patch.name = format!("perturbed sphere r={}", self.r);
                spec = Some(s);
                (patch, None)
            }
        };
        Ok(Selected {
            patch,
            reference,
            echo: SurfaceEcho {
                surface: self.surface,
                r: self.r,
                u: self.u.clone(),
                spec,
            },
        })
    }
}

/// `NTHETAxNPHI`, e.g. `64x128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or("expected NTHETAxNPHI, e.g. 64x128")?;
        let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|&n| n >= 2);
        match (parse(a), parse(b)) {
            (Some(n_theta), Some(n_phi)) => Ok(Grid { n_theta, n_phi }),
            _ => Err("grid sizes must be integers >= 2".into()),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_theta, self.n_phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let g: Grid = "64x128".parse().unwrap();
        assert_eq!((g.n_theta, g.n_phi), (64, 128));
        assert_eq!(g.to_string(), "64x128");
        assert!("64".parse::<Grid>().is_err());
        assert!("1x4".parse::<Grid>().is_err());
    }
}
