//! Text records for norm balls: whitespace-separated `key=value` fields.
//!
//! ```text
//! kind=lp p=inf radius=1 dim=2 bound=1
//! kind=oracle name=k2 dim=2 bound=2
//! kind=oracle name=kt predictors=5 dim=26 bound=2
//! ```
//!
//! Oracle records are resolved against the built-in bodies by name.

use std::collections::HashMap;
use std::str::FromStr;

use super::{format_p, BallKind, NormBall};
use crate::error::{invalid, Error, Result};

impl NormBall {
    pub fn to_record(&self) -> String {
        match self.kind() {
            BallKind::Lp { p, radius } => format!(
                "kind=lp p={} radius={} dim={} bound={}",
                format_p(*p),
                radius,
                self.dim(),
                radius
            ),
            BallKind::Oracle(o) => {
                let mut s = format!("kind=oracle name={}", o.name);
                for (k, v) in &o.params {
                    s.push_str(&format!(" {k}={v}"));
                }
                s.push_str(&format!(" dim={} bound={}", self.dim(), o.bound));
                s
            }
        }
    }
}

fn parse_p(s: &str) -> Result<f64> {
    match s {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => s
            .parse()
            .map_err(|_| invalid(format!("bad norm exponent `{s}`"))),
    }
}

impl FromStr for NormBall {
    type Err = Error;

    fn from_str(record: &str) -> Result<Self> {
        let mut fields = HashMap::new();
        for token in record.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| invalid(format!("record field `{token}` is not key=value")))?;
            fields.insert(k, v);
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| invalid(format!("record is missing `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| invalid(format!("record field `{key}` is not a number")))
        };
        let dim: usize = get("dim")?
            .parse()
            .map_err(|_| invalid("record field `dim` is not an integer"))?;

        let ball = match get("kind")? {
            "lp" => NormBall::lp(parse_p(get("p")?)?, num("radius")?, dim)?,
            "oracle" => match get("name")? {
                "k2" => NormBall::k2(),
                "k3" => NormBall::k3(),
                "lp" => NormBall::lp_oracle(parse_p(get("p")?)?, num("radius")?, dim)?,
                "kt" => {
                    let p: usize = get("predictors")?
                        .parse()
                        .map_err(|_| invalid("record field `predictors` is not an integer"))?;
                    crate::linreg::kt_ball(p)?
                }
                other => return Err(invalid(format!("unknown oracle body `{other}`"))),
            },
            other => return Err(invalid(format!("unknown ball kind `{other}`"))),
        };
        if ball.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: ball.dim(),
                found: dim,
            });
        }
        if let Some(b) = fields.get("bound") {
            let b: f64 = b
                .parse()
                .map_err(|_| invalid("record field `bound` is not a number"))?;
            if (b - ball.bound()).abs() > 1e-12 * b.abs().max(1.0) {
                return Err(invalid(format!(
                    "record bound {b} disagrees with the body's bound {}",
                    ball.bound()
                )));
            }
        }
        Ok(ball)
    }
}
