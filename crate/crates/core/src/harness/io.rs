use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rsg::Irsg;
use crate::valuations::{BidderDistribution, Instance, ValuationClass};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    bidders: Vec<BidderDistribution>,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON, reporting syntax and shape errors with their position.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads and validates an instance file. Probabilities within tolerance of
/// one are renormalized; invariant violations name the offending bidder.
pub fn load_instance(path: &Path) -> Result<Instance> {
    instance_from_str(path, &read_text(path)?)
}

pub fn instance_from_str(path: &Path, text: &str) -> Result<Instance> {
    let raw: InstanceFile = parse_json(path, text)?;
    Instance::new(raw.m, raw.bidders)
}

/// [`load_instance`] followed by a class check on every support valuation.
pub fn load_instance_checked(path: &Path, classes: &[ValuationClass]) -> Result<Instance> {
    let inst = load_instance(path)?;
    for &c in classes {
        inst.require_class(c)?;
    }
    Ok(inst)
}

/// Reads a score generator file and checks it against `inst`.
pub fn load_irsg(path: &Path, inst: &Instance) -> Result<Irsg> {
    let g: Irsg = parse_json(path, &read_text(path)?)?;
    g.check_aligned(inst)?;
    Ok(g)
}
