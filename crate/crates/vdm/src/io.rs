//! CSV output and JSON checkpoints.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vdm_core::net::{Activation, LinearGenerator, Mlp};
use vdm_core::trainer::TrainTrace;

use crate::error::VdmError;

/// Write rows of a CSV with the given header to any sink.
pub fn write_csv<W: Write, R: IntoIterator<Item = Vec<String>>>(sink: W, header: &[&str], rows: R) -> Result<(), VdmError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| VdmError::io("<csv>", e))?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>, VdmError> {
    File::create(path).map(BufWriter::new).map_err(|e| VdmError::io(path, e))
}

/// Floats are written in shortest round-trip form.
pub fn trace_rows(trace: &TrainTrace) -> impl Iterator<Item = Vec<String>> + '_ {
    trace.records.iter().map(|r| {
        vec![
            r.step.to_string(),
            r.objective.to_string(),
            r.mu.to_string(),
            r.sigma.to_string(),
            r.grad_w_norm.to_string(),
            r.grad_t_norm.to_string(),
            r.tpr.to_string(),
            r.tnr.to_string(),
        ]
    })
}

pub fn write_trace<W: Write>(sink: W, trace: &TrainTrace) -> Result<(), VdmError> {
    write_csv(sink, &TrainTrace::HEADER, trace_rows(trace))
}

/// Network and sampler parameters with a dims header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub divergence: String,
    pub dims: Vec<usize>,
    pub activation: String,
    pub params: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

impl Checkpoint {
    pub fn new(divergence: &str, net: &Mlp, gen: &LinearGenerator) -> Self {
        Checkpoint {
            divergence: divergence.to_string(),
            dims: net.dims().to_vec(),
            activation: net.activation().name().to_string(),
            params: net.params().to_vec(),
            mu: gen.mu,
            sigma: gen.sigma(),
        }
    }

    pub fn models(&self) -> Result<(Mlp, LinearGenerator), VdmError> {
        let act: Activation = self.activation.parse().map_err(|e: vdm_core::NetError| VdmError::Config(e.to_string()))?;
        let net = Mlp::from_params(&self.dims, act, self.params.clone()).map_err(|e| VdmError::Config(e.to_string()))?;
        if !(self.sigma > 0.0) {
            return Err(VdmError::Config(format!("checkpoint sigma {} must be positive", self.sigma)));
        }
        Ok((net, LinearGenerator::new(self.mu, self.sigma)))
    }

    pub fn save(&self, path: &Path) -> Result<(), VdmError> {
        let mut w = create(path)?;
        serde_json::to_writer(&mut w, self).map_err(|e| VdmError::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        w.flush().map_err(|e| VdmError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, VdmError> {
        let text = std::fs::read_to_string(path).map_err(|e| VdmError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| VdmError::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }
}
