use std::fmt;

use serde_json::{json, Map, Value};

use crate::exact_arith::{fmt_rat, Rat, Valuation};

/// A rational extended by `-inf` and `+inf`. Integers display without a
/// denominator, as in report witnesses.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ext {
    NegInf,
    Fin(Rat),
    Inf,
}

impl Ext {
    pub fn sub(&self, other: &Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a - b),
            (Ext::Inf, Ext::Inf) | (Ext::NegInf, Ext::NegInf) => Ext::Fin(Rat::from_integer(0.into())),
            (Ext::Inf, _) | (_, Ext::NegInf) => Ext::Inf,
            (Ext::NegInf, _) | (_, Ext::Inf) => Ext::NegInf,
        }
    }

    pub fn from_valuation(v: Valuation) -> Ext {
        match v.finite() {
            Some(k) => Ext::Fin(Rat::from_integer(k.into())),
            None => Ext::Inf,
        }
    }
}

impl From<Rat> for Ext {
    fn from(q: Rat) -> Ext {
        Ext::Fin(q)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::Inf => write!(f, "inf"),
            Ext::Fin(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Ext::Fin(q) => write!(f, "{}", fmt_rat(q)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    NeedsReview,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NeedsReview => "NEEDS-REVIEW",
            Status::Error => "ERROR",
        })
    }
}

/// One required-versus-achieved valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub q: String,
    pub required: Ext,
    pub achieved: Ext,
    pub slack: Ext,
}

impl Witness {
    pub fn new(q: impl Into<String>, required: Ext, achieved: Ext) -> Witness {
        let slack = achieved.sub(&required);
        Witness { q: q.into(), required, achieved, slack }
    }

    /// An exact equality `achieved = target`. The slack is zero when it holds
    /// and minus the distance otherwise.
    pub fn equal(q: impl Into<String>, target: &Rat, achieved: &Rat) -> Witness {
        let gap = achieved - target;
        let slack = if gap < Rat::from_integer(0.into()) { gap } else { -gap };
        Witness { q: q.into(), required: Ext::Fin(target.clone()), achieved: Ext::Fin(achieved.clone()), slack: Ext::Fin(slack) }
    }

    pub fn ok(&self) -> bool {
        self.slack >= Ext::Fin(Rat::from_integer(0.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub id: String,
    pub p: i64,
    pub status: Status,
    pub witness: Vec<Witness>,
    /// Set only for `ERROR` reports.
    pub error: Option<String>,
    /// True when a failing witness came from a componentwise sigma
    /// congruence, which can fail for equal elements written differently.
    pub componentwise: bool,
}

impl VerificationReport {
    pub fn error(id: &str, p: i64, msg: impl Into<String>) -> VerificationReport {
        VerificationReport {
            id: id.into(),
            p,
            status: Status::Error,
            witness: vec![],
            error: Some(msg.into()),
            componentwise: false,
        }
    }

    /// Status from the witnesses: PASS iff every slack is non-negative.
    pub fn from_witnesses(id: &str, p: i64, witness: Vec<Witness>, componentwise: bool) -> VerificationReport {
        let status = if witness.iter().all(Witness::ok) {
            Status::Pass
        } else if componentwise {
            Status::NeedsReview
        } else {
            Status::Fail
        };
        VerificationReport { id: id.into(), p, status, witness, error: None, componentwise }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("id".into(), self.id.clone().into());
        m.insert("p".into(), self.p.into());
        m.insert("status".into(), self.status.to_string().into());
        m.insert(
            "witness".into(),
            self.witness
                .iter()
                .map(|w| {
                    json!({
                        "q": w.q,
                        "required": w.required.to_string(),
                        "achieved": w.achieved.to_string(),
                        "slack": w.slack.to_string(),
                    })
                })
                .collect::<Vec<_>>()
                .into(),
        );
        if let Some(e) = &self.error {
            m.insert("error".into(), e.clone().into());
        }
        Value::Object(m)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} p={} {}", self.id, self.p, self.status)?;
        if let Some(e) = &self.error {
            write!(f, " ({e})")?;
        }
        for w in &self.witness {
            write!(f, "\n  {}: required {} achieved {} slack {}", w.q, w.required, w.achieved, w.slack)?;
        }
        Ok(())
    }
}
