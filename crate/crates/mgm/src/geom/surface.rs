//! Textual surface specifications, e.g. `sphere:k=5`, `cyclide:n=8192,seed=7`,
//! or `file:nodes.xyz`.

use crate::error::{Error, Result};
use crate::geom::{cyclide_nodes, icosahedral_sphere_nodes, PointCloud};
use crate::io::{load_cloud, CloudFormat};
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceSpec {
    Sphere { k: u32 },
    Cyclide { n: usize, seed: u64 },
    File { path: PathBuf },
}

impl SurfaceSpec {
    /// Parse a surface specification string.
    pub fn parse(text: &str) -> Result<SurfaceSpec> {
        let bad = |msg: String| Error::InvalidArgument(format!("surface spec '{text}': {msg}"));
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| bad("expected '<kind>:<params>'".into()))?;
        match kind {
            "sphere" => {
                let mut k: Option<u32> = None;
                for part in rest.split(',') {
                    match part.split_once('=') {
                        Some(("k", v)) => {
                            k = Some(v.parse().map_err(|_| bad(format!("bad k '{v}'")))?)
                        }
                        _ => return Err(bad(format!("unknown sphere parameter '{part}'"))),
                    }
                }
                Ok(SurfaceSpec::Sphere {
                    k: k.ok_or_else(|| bad("sphere needs k=<refinement>".into()))?,
                })
            }
            "cyclide" => {
                let mut n: Option<usize> = None;
                let mut seed: Option<u64> = None;
                for part in rest.split(',') {
                    match part.split_once('=') {
                        Some(("n", v)) => {
                            n = Some(v.parse().map_err(|_| bad(format!("bad n '{v}'")))?)
                        }
                        Some(("seed", v)) => {
                            seed = Some(v.parse().map_err(|_| bad(format!("bad seed '{v}'")))?)
                        }
                        _ => return Err(bad(format!("unknown cyclide parameter '{part}'"))),
                    }
                }
                Ok(SurfaceSpec::Cyclide {
                    n: n.ok_or_else(|| bad("cyclide needs n=<count>".into()))?,
                    seed: seed.ok_or_else(|| bad("cyclide needs seed=<integer>".into()))?,
                })
            }
            "file" => {
                if rest.is_empty() {
                    return Err(bad("file needs a path".into()));
                }
                Ok(SurfaceSpec::File {
                    path: PathBuf::from(rest),
                })
            }
            other => Err(bad(format!(
                "unknown surface kind '{other}' (expected sphere, cyclide, or file)"
            ))),
        }
    }

    /// Materialize the point cloud.
    pub fn build(&self) -> Result<PointCloud> {
        match self {
            SurfaceSpec::Sphere { k } => icosahedral_sphere_nodes(*k),
            SurfaceSpec::Cyclide { n, seed } => cyclide_nodes(*n, *seed),
            SurfaceSpec::File { path } => {
                let format = CloudFormat::from_path(path)?;
                load_cloud(path, format)
            }
        }
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceSpec::Sphere { k } => write!(f, "sphere:k={k}"),
            SurfaceSpec::Cyclide { n, seed } => write!(f, "cyclide:n={n},seed={seed}"),
            SurfaceSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_forms() {
        assert_eq!(
            SurfaceSpec::parse("sphere:k=5").unwrap(),
            SurfaceSpec::Sphere { k: 5 }
        );
        assert_eq!(
            SurfaceSpec::parse("cyclide:n=8192,seed=7").unwrap(),
            SurfaceSpec::Cyclide { n: 8192, seed: 7 }
        );
        assert_eq!(
            SurfaceSpec::parse("file:clouds/bunny.xyz").unwrap(),
            SurfaceSpec::File {
                path: PathBuf::from("clouds/bunny.xyz")
            }
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in [
            "sphere",
            "sphere:k=abc",
            "sphere:j=3",
            "cyclide:n=100",
            "cyclide:seed=1",
            "torus:r=2",
            "file:",
            "",
        ] {
            assert!(SurfaceSpec::parse(bad).is_err(), "accepted '{bad}'");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in ["sphere:k=3", "cyclide:n=500,seed=9", "file:a.ply"] {
            let spec = SurfaceSpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(SurfaceSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }
}
