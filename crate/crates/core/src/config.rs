//! Ball/tube configurations and their JSON form.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Ball, Scale, Tube};

/// Provenance and bookkeeping attached to every configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub construction: String,
    pub alpha: f64,
    pub beta: f64,
    /// Thickening factor S; objects have radius/width S·δ.
    #[serde(default = "one")]
    pub thickening: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

fn one() -> u32 {
    1
}

impl Meta {
    pub fn new(construction: impl Into<String>, alpha: f64, beta: f64) -> Self {
        Self {
            construction: construction.into(),
            alpha,
            beta,
            thickening: 1,
            seed: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Value::as_f64)
    }
}

/// A ball set and a tube set at a common scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub scale: Scale,
    pub balls: Vec<Ball>,
    pub tubes: Vec<Tube>,
    pub meta: Meta,
}

impl Configuration {
    pub fn new(scale: Scale, balls: Vec<Ball>, tubes: Vec<Tube>, meta: Meta) -> Self {
        Self {
            scale,
            balls,
            tubes,
            meta,
        }
    }

    /// Radius/width every object is expected to carry.
    pub fn object_size(&self) -> f64 {
        self.scale.delta() * self.meta.thickening as f64
    }

    /// Checks that every ball radius and tube width equals S·δ.
    pub fn check_uniform(&self) -> Result<()> {
        let want = self.object_size();
        let close = |x: f64| (x - want).abs() <= 1e-12 * want;
        if let Some(b) = self.balls.iter().find(|b| !close(b.r)) {
            return Err(Error::MixedRadii {
                first: want,
                other: b.r,
            });
        }
        if let Some(t) = self.tubes.iter().find(|t| !close(t.width)) {
            return Err(Error::MixedRadii {
                first: want,
                other: t.width,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ConfigDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDoc = serde_json::from_str(text)?;
        doc.into_config()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct BallDoc {
    cx: f64,
    cy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TubeDoc {
    cx: f64,
    cy: f64,
    theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
}

/// On-disk layout: `{"k","alpha","beta","construction","balls","tubes","meta"}`.
/// Radii and widths are implied by `k` and `meta.thickening`, and tube
/// lengths default to 1; any object that differs carries explicit fields.
#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    k: u32,
    alpha: f64,
    beta: f64,
    construction: String,
    balls: Vec<BallDoc>,
    tubes: Vec<TubeDoc>,
    meta: Meta,
}

impl From<&Configuration> for ConfigDoc {
    fn from(c: &Configuration) -> Self {
        let size = c.object_size();
        let differs = |x: f64, want: f64| (x != want).then_some(x);
        Self {
            k: c.scale.k(),
            alpha: c.meta.alpha,
            beta: c.meta.beta,
            construction: c.meta.construction.clone(),
            balls: c
                .balls
                .iter()
                .map(|b| BallDoc {
                    cx: b.cx,
                    cy: b.cy,
                    r: differs(b.r, size),
                })
                .collect(),
            tubes: c
                .tubes
                .iter()
                .map(|t| TubeDoc {
                    cx: t.cx,
                    cy: t.cy,
                    theta: t.theta,
                    width: differs(t.width, size),
                    length: differs(t.length, 1.0),
                })
                .collect(),
            meta: c.meta.clone(),
        }
    }
}

impl ConfigDoc {
    fn into_config(self) -> Result<Configuration> {
        let scale = Scale::new(self.k)?;
        let mut meta = self.meta;
        meta.alpha = self.alpha;
        meta.beta = self.beta;
        meta.construction = self.construction;
        if meta.thickening == 0 {
            return Err(Error::InvalidParameter {
                name: "thickening",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let size = scale.delta() * meta.thickening as f64;
        let balls = self
            .balls
            .into_iter()
            .map(|b| Ball::new(b.cx, b.cy, b.r.unwrap_or(size)))
            .collect();
        let tubes = self
            .tubes
            .into_iter()
            .map(|t| Tube::new(t.cx, t.cy, t.theta, t.width.unwrap_or(size), t.length.unwrap_or(1.0)))
            .collect();
        Ok(Configuration::new(scale, balls, tubes, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let s = Scale::new(5).unwrap();
        let d = s.delta();
        let cfg = Configuration::new(
            s,
            vec![Ball::new(0.1 + d / 3.0, 0.7, d), Ball::new(0.5, 0.5, d)],
            vec![
                Tube::unit(0.5, 0.5, 1.234_567_890_123, d),
                Tube::new(0.2, 0.3, 0.0, d, 2.0),
            ],
            Meta::new("test", 1.0, 0.5).with("gamma", 0.25),
        );
        let back = Configuration::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn uniformity_check() {
        let s = Scale::new(4).unwrap();
        let d = s.delta();
        let mut cfg = Configuration::new(
            s,
            vec![Ball::new(0.5, 0.5, d)],
            vec![Tube::unit(0.5, 0.5, 0.0, d)],
            Meta::new("t", 0.0, 0.0),
        );
        assert!(cfg.check_uniform().is_ok());
        cfg.balls.push(Ball::new(0.1, 0.1, 2.0 * d));
        assert!(matches!(cfg.check_uniform(), Err(Error::MixedRadii { .. })));
    }

    #[test]
    fn minimal_document_parses() {
        let text = r#"{"k":3,"alpha":0,"beta":0,"construction":"hand",
            "balls":[{"cx":0.5,"cy":0.5}],"tubes":[{"cx":0.5,"cy":0.5,"theta":0}],
            "meta":{"construction":"","alpha":0,"beta":0}}"#;
        let cfg = Configuration::from_json(text).unwrap();
        assert_eq!(cfg.balls[0].r, 0.125);
        assert_eq!(cfg.tubes[0].length, 1.0);
        assert_eq!(cfg.meta.construction, "hand");
    }
}
