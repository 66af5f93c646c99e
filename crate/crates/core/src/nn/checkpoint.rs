//! Versioned JSON document holding named networks (spec plus parameter
//! arrays). Doubles are written in shortest round-trip form, so save/load is
//! value-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::mlp::{Mlp, MlpSpec};

pub const CHECKPOINT_FORMAT: &str = "trigan-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub name: String,
    pub spec: MlpSpec,
    pub params: Vec<ParamRecord>,
}

impl NetworkRecord {
    pub fn from_mlp<T: Scalar>(name: &str, net: &Mlp<T>) -> Result<Self> {
        let mut params = Vec::with_capacity(net.params().len());
        for (i, p) in net.params().iter().enumerate() {
            let values: Vec<f64> = p.values().iter().map(|v| v.to_f64().unwrap()).collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(
                    "checkpoint",
                    format!("network {name} parameter {i} is not finite"),
                ));
            }
            params.push(ParamRecord {
                shape: p.shape().to_vec(),
                values,
            });
        }
        Ok(NetworkRecord {
            name: name.to_string(),
            spec: net.spec().clone(),
            params,
        })
    }

    pub fn to_mlp<T: Scalar>(&self) -> Result<Mlp<T>> {
        let params = self
            .params
            .iter()
            .map(|p| Tensor::new(p.shape.clone(), p.values.iter().map(|&v| T::lit(v)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_params(self.spec.clone(), params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Free-form model description (kind, noise width, ...).
    pub meta: serde_json::Value,
    pub networks: Vec<NetworkRecord>,
}

impl Checkpoint {
    pub fn new(meta: serde_json::Value, networks: Vec<NetworkRecord>) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            meta,
            networks,
        }
    }

    pub fn network(&self, name: &str) -> Result<&NetworkRecord> {
        self.networks
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| Error::Format(format!("checkpoint has no network named {name}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("unknown checkpoint format {:?}", ckpt.format)));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::OutputActivation;

    #[test]
    fn round_trip_is_exact() {
        let spec = MlpSpec::new(3, vec![7, 5], 1).with_output(OutputActivation::Sigmoid);
        let net = Mlp::<f64>::init(spec, 42).unwrap();
        let ckpt = Checkpoint::new(
            serde_json::json!({"kind": "test"}),
            vec![NetworkRecord::from_mlp("d", &net).unwrap()],
        );
        let back = Checkpoint::from_json(&ckpt.to_json().unwrap()).unwrap();
        assert_eq!(back, ckpt);
        let net2: Mlp<f64> = back.network("d").unwrap().to_mlp().unwrap();
        assert_eq!(net2, net);
        assert!(back.network("missing").is_err());
    }

    #[test]
    fn version_and_format_are_checked() {
        let mut ckpt = Checkpoint::new(serde_json::Value::Null, vec![]);
        ckpt.version = 99;
        assert!(matches!(
            Checkpoint::from_json(&ckpt.to_json().unwrap()),
            Err(Error::Format(_))
        ));
        ckpt.version = CHECKPOINT_VERSION;
        ckpt.format = "other".into();
        assert!(Checkpoint::from_json(&ckpt.to_json().unwrap()).is_err());
    }

    #[test]
    fn shape_mismatch_on_load() {
        let net = Mlp::<f64>::init(MlpSpec::new(2, vec![3], 1), 0).unwrap();
        let mut rec = NetworkRecord::from_mlp("g", &net).unwrap();
        rec.spec.input_width = 4;
        assert!(rec.to_mlp::<f64>().is_err());
    }
}
