//! Parameter checkpoints: a plain-text header followed by little-endian `f64`s.
//!
//! ```text
//! rrp-checkpoint 1
//! layers 25,32,4
//! step 10000
//! schedule 1 0 10000 0.3
//! params 964
//! end
//! <964 × 8 bytes>
//! ```

use std::io::{BufRead, Read, Write};

use crate::error::{Result, RrpError};
use crate::nn::DenseNet;
use crate::noise::NoiseSchedule;

const MAGIC: &str = "rrp-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: DenseNet,
    pub step: u64,
    pub schedule: Option<NoiseSchedule>,
}

impl Checkpoint {
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        let layers: Vec<String> = self.net.layer_sizes().iter().map(|n| n.to_string()).collect();
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "layers {}", layers.join(","))?;
        writeln!(w, "step {}", self.step)?;
        match &self.schedule {
            Some(s) => writeln!(
                w,
                "schedule {} {} {} {}",
                s.sigma_max(),
                s.sigma_min(),
                s.total_steps(),
                s.decay_fraction()
            )?,
            None => writeln!(w, "schedule none")?,
        }
        writeln!(w, "params {}", self.net.num_params())?;
        writeln!(w, "end")?;
        for p in self.net.params() {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = std::io::BufReader::new(r);
        let mut line = String::new();
        let mut next_line = |r: &mut std::io::BufReader<_>| -> Result<String> {
            line.clear();
            r.read_line(&mut line).map_err(|e| RrpError::Parse(e.to_string()))?;
            Ok(line.trim_end().to_string())
        };
        if next_line(&mut r)? != MAGIC {
            return Err(RrpError::Parse("not an rrp checkpoint".into()));
        }
        let mut layers = None;
        let mut step = None;
        let mut schedule = None;
        let mut count = None;
        loop {
            let l = next_line(&mut r)?;
            let (key, value) = l.split_once(' ').unwrap_or((l.as_str(), ""));
            match key {
                "end" => break,
                "layers" => {
                    layers = Some(
                        value
                            .split(',')
                            .map(|v| v.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| RrpError::Parse(format!("layers: {e}")))?,
                    )
                }
                "step" => {
                    step = Some(
                        value
                            .parse::<u64>()
                            .map_err(|e| RrpError::Parse(format!("step: {e}")))?,
                    )
                }
                "schedule" if value == "none" => schedule = Some(None),
                "schedule" => {
                    let f: Vec<&str> = value.split(' ').collect();
                    let num = |i: usize| -> Result<f64> {
                        f.get(i)
                            .ok_or_else(|| RrpError::Parse("schedule: missing field".into()))?
                            .parse::<f64>()
                            .map_err(|e| RrpError::Parse(format!("schedule: {e}")))
                    };
                    schedule = Some(Some(NoiseSchedule::new(num(0)?, num(1)?, num(2)? as u64, num(3)?)?));
                }
                "params" => {
                    count = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| RrpError::Parse(format!("params: {e}")))?,
                    )
                }
                "" => return Err(RrpError::Parse("checkpoint header ended without 'end'".into())),
                other => return Err(RrpError::Parse(format!("unknown checkpoint header key '{other}'"))),
            }
        }
        let layers = layers.ok_or_else(|| RrpError::Parse("missing layers".into()))?;
        let count = count.ok_or_else(|| RrpError::Parse("missing params".into()))?;
        let mut bytes = vec![0u8; count * 8];
        r.read_exact(&mut bytes)
            .map_err(|e| RrpError::Parse(format!("parameter block: {e}")))?;
        let params = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Checkpoint {
            net: DenseNet::from_params(&layers, params)?,
            step: step.ok_or_else(|| RrpError::Parse("missing step".into()))?,
            schedule: schedule.ok_or_else(|| RrpError::Parse("missing schedule".into()))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn header_is_plain_text() {
        let net = DenseNet::zeros(&[2, 3, 1]).unwrap();
        let ck = Checkpoint {
            net,
            step: 42,
            schedule: None,
        };
        let bytes = ck.to_bytes();
        let header = String::from_utf8_lossy(&bytes[..bytes.len() - 13 * 8]).to_string();
        assert_eq!(
            header,
            "rrp-checkpoint 1\nlayers 2,3,1\nstep 42\nschedule none\nparams 13\nend\n"
        );
    }

    #[test]
    fn corrupt_inputs_rejected() {
        assert!(Checkpoint::read_from(&b"hello\n"[..]).is_err());
        let net = DenseNet::zeros(&[1, 1]).unwrap();
        let mut bytes = Checkpoint {
            net,
            step: 0,
            schedule: None,
        }
        .to_bytes();
        bytes.truncate(bytes.len() - 3);
        assert!(Checkpoint::read_from(bytes.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(seed in any::<u64>(), step in any::<u64>(), smax in 0.0f64..3.0) {
            let net = DenseNet::new(&[3, 4, 2], &mut SeededRng::new(seed)).unwrap();
            let schedule = Some(NoiseSchedule::new(smax, 0.0, 1000, 0.3).unwrap());
            let ck = Checkpoint { net, step, schedule };
            prop_assert_eq!(Checkpoint::read_from(ck.to_bytes().as_slice()).unwrap(), ck);
        }
    }
}
