//! Self-describing JSON container for trajectories.
//!
//! Floats are written in shortest round-trip form, so reading back gives
//! bit-identical fields.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::state::{DefectState, FluidState, Grid};
use crate::thermo::GasConstants;
use crate::trajectory::{InitialDatum, Node, Side, Snapshot, Trajectory, TrajectoryError};

pub const FORMAT: &str = "euler-semiflow-trajectory";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("corrupt trajectory file: {0}")]
    Corrupt(String),
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.display().to_string(), source }
    }
}

impl From<TrajectoryError> for IoError {
    fn from(e: TrajectoryError) -> Self {
        IoError::Corrupt(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header<T> {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub cells: usize,
    pub length: T,
    pub gamma: T,
    pub c_v: T,
    pub s0: T,
    pub energy: T,
    pub dt_out: T,
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideFlag {
    /// The `0-` value.
    Origin,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord<T> {
    pub t: T,
    pub side: SideFlag,
    pub rho: Vec<T>,
    pub momentum: Vec<T>,
    pub entropy: Vec<T>,
    pub c_kin: Vec<T>,
    pub c_int: Vec<T>,
    pub c_plus: Vec<T>,
    pub c_minus: Vec<T>,
}

impl<T: Real> NodeRecord<T> {
    fn from_snapshot(s: &Snapshot<T>, side: SideFlag) -> Self {
        Self {
            t: s.t,
            side,
            rho: s.state.rho.clone(),
            momentum: s.state.momentum.clone(),
            entropy: s.state.entropy.clone(),
            c_kin: s.defects.kinetic.clone(),
            c_int: s.defects.internal.clone(),
            c_plus: s.defects.convective_plus.clone(),
            c_minus: s.defects.convective_minus.clone(),
        }
    }

    fn into_snapshot(self) -> Snapshot<T> {
        Snapshot {
            t: self.t,
            state: FluidState { rho: self.rho, momentum: self.momentum, entropy: self.entropy },
            defects: DefectState {
                kinetic: self.c_kin,
                internal: self.c_int,
                convective_plus: self.c_plus,
                convective_minus: self.c_minus,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile<T> {
    pub header: Header<T>,
    pub datum: FluidState<T>,
    /// The origin record, then for each node an optional left record
    /// followed by its right record.
    pub records: Vec<NodeRecord<T>>,
}

impl<T: Real> TrajectoryFile<T> {
    pub fn from_trajectory(traj: &Trajectory<T>) -> Self {
        let gas = traj.gas();
        let header = Header {
            format: FORMAT.into(),
            version: VERSION,
            id: traj.id().into(),
            cells: traj.grid().cells,
            length: traj.grid().length,
            gamma: gas.gamma(),
            c_v: gas.c_v(),
            s0: gas.entropy_floor(),
            energy: traj.energy_budget(),
            dt_out: traj.dt_out(),
            admissible: traj.is_admissible(),
        };
        let mut records = vec![NodeRecord::from_snapshot(traj.origin(), SideFlag::Origin)];
        for n in traj.nodes() {
            if let Some(left) = &n.left {
                records.push(NodeRecord::from_snapshot(left, SideFlag::Left));
            }
            records.push(NodeRecord::from_snapshot(n.side(Side::Right), SideFlag::Right));
        }
        Self { header, datum: traj.datum().state.clone(), records }
    }

    pub fn into_trajectory(self) -> Result<Trajectory<T>, IoError> {
        let h = self.header;
        if h.format != FORMAT || h.version != VERSION {
            return Err(IoError::Corrupt(format!("unsupported format {} v{}", h.format, h.version)));
        }
        let gas = GasConstants::new(h.gamma)
            .map_err(|e| IoError::Corrupt(e.to_string()))?
            .with_entropy_floor(h.s0);
        if gas.c_v() != h.c_v {
            return Err(IoError::Corrupt(format!("c_v {} does not match gamma {}", h.c_v, h.gamma)));
        }
        let grid = Grid::new(h.cells, h.length).map_err(|e| IoError::Corrupt(e.to_string()))?;
        self.datum.check_shape(&grid).map_err(|e| IoError::Corrupt(e.to_string()))?;
        let datum = InitialDatum { state: self.datum, energy: h.energy };
        let mut records = self.records.into_iter();
        let origin = match records.next() {
            Some(r) if r.side == SideFlag::Origin => r.into_snapshot(),
            _ => return Err(IoError::Corrupt("first record must be the origin".into())),
        };
        let mut nodes = Vec::new();
        let mut pending: Option<Snapshot<T>> = None;
        for r in records {
            match r.side {
                SideFlag::Origin => return Err(IoError::Corrupt("repeated origin record".into())),
                SideFlag::Left if pending.is_some() => return Err(IoError::Corrupt("two left records in a row".into())),
                SideFlag::Left => pending = Some(r.into_snapshot()),
                SideFlag::Right => {
                    let right = r.into_snapshot();
                    nodes.push(match pending.take() {
                        Some(left) if left.t != right.t => {
                            return Err(IoError::Corrupt(format!("left record at {} before right record at {}", left.t, right.t)));
                        }
                        Some(left) => Node::jump(left, right),
                        None => Node::continuous(right),
                    });
                }
            }
        }
        if pending.is_some() {
            return Err(IoError::Corrupt("dangling left record".into()));
        }
        Ok(Trajectory::from_parts(h.id, grid, gas, h.dt_out, h.admissible, datum, origin, nodes)?)
    }
}

pub fn to_json<T: Real>(traj: &Trajectory<T>) -> String {
    serde_json::to_string_pretty(&TrajectoryFile::from_trajectory(traj)).expect("trajectory serializes")
}

pub fn from_json<T: Real>(text: &str) -> Result<Trajectory<T>, IoError> {
    let file: TrajectoryFile<T> = serde_json::from_str(text).map_err(|e| IoError::Corrupt(e.to_string()))?;
    file.into_trajectory()
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| IoError::io(path, std::io::ErrorKind::InvalidInput.into()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| IoError::io(path, e))
}

pub fn write_trajectory<T: Real>(path: &Path, traj: &Trajectory<T>) -> Result<(), IoError> {
    write_atomic(path, to_json(traj).as_bytes())
}

pub fn read_trajectory<T: Real>(path: &Path) -> Result<Trajectory<T>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::EntropyFixture;

    #[test]
    fn round_trip_with_jump_and_shift() {
        let g = GasConstants::<f64>::diatomic().with_entropy_floor(-3.0);
        let fx = EntropyFixture { dt: 0.1, ..Default::default() };
        let traj = fx.build("jumpy", &[0.0, 0.1, 0.1 / 3.0, 0.5], &[0.0, 0.2, 0.3, 0.5], &g).unwrap();
        for t in [traj.clone(), traj.time_shift(0.1).unwrap(), traj.clone().non_admissible()] {
            let back: Trajectory<f64> = from_json(&to_json(&t)).unwrap();
            assert_eq!(back, t);
            assert_eq!(to_json(&back), to_json(&t));
        }
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let g = GasConstants::<f64>::diatomic();
        let traj = EntropyFixture::default().continuous("a", &[0.0, 0.1], &g).unwrap();
        let text = to_json(&traj);
        assert!(matches!(from_json::<f64>(&text[..text.len() / 2]), Err(IoError::Corrupt(_))));
        let bad_cv = text.replacen("\"c_v\": 2.5000000000000004", "\"c_v\": 2.5", 1);
        assert_ne!(bad_cv, text);
        assert!(matches!(from_json::<f64>(&bad_cv), Err(IoError::Corrupt(_))));
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = std::env::temp_dir().join(format!("euler-semiflow-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = GasConstants::<f64>::diatomic();
        let traj = EntropyFixture::default().continuous("a", &[0.0, 0.1], &g).unwrap();
        let path = dir.join("a.json");
        write_trajectory(&path, &traj).unwrap();
        assert_eq!(read_trajectory::<f64>(&path).unwrap(), traj);
        fs::remove_dir_all(&dir).unwrap();
    }
}
