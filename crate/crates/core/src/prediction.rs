use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::class::NounClass;
use crate::error::{Error, Result};

/// The stage that produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Transfer,
    Clustering,
    Frequency,
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Transfer => "transfer",
            Method::Clustering => "clustering",
            Method::Frequency => "frequency",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transfer" => Ok(Method::Transfer),
            "clustering" => Ok(Method::Clustering),
            "frequency" => Ok(Method::Frequency),
            "random" => Ok(Method::Random),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// One word's class assignment from a single method. Stage-specific
/// output records carry these four fields plus extras, so any of them can
/// be read back as a `Prediction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub word: String,
    pub class: NounClass,
    pub confidence: f64,
    pub method: Method,
}

impl Prediction {
    pub fn new(word: impl Into<String>, class: impl Into<NounClass>, confidence: f64, method: Method) -> Self {
        Self {
            word: word.into(),
            class: class.into(),
            confidence,
            method,
        }
    }
}
