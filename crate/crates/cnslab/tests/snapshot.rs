mod common;

use std::fs;

use cnslab::profiles::FluidParams;
use cnslab::snapshot::*;
use cnslab::spectral::{Grid, State};
use cnslab::Error;
use common::random_state;

fn sample_set() -> SnapshotSet {
    let grid = Grid::new(16, 7.5).unwrap();
    SnapshotSet {
        grid,
        params: FluidParams::default(),
        times: vec![0.0, 0.25, 1.0 / 3.0],
        states: vec![
            random_state(grid, 1),
            random_state(grid, 2),
            State::zeros(grid),
        ],
    }
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut set = sample_set();
    set.states[1].m[0].coeffs[3].re = f64::MIN_POSITIVE / 4.0;
    set.states[1].m[1].coeffs[5].im = -0.0;
    let path = write_snapshots(dir.path(), "run", &set).unwrap();
    assert_eq!(path, dir.path().join("run.json"));
    let back = read_snapshots(&path).unwrap();
    assert_eq!(back.grid, set.grid);
    assert_eq!(back.params, set.params);
    assert_eq!(back.times.len(), set.times.len());
    for (a, b) in back.times.iter().zip(&set.times) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (x, y) in back.states.iter().zip(&set.states) {
        for (f, g) in x.fields().iter().zip(y.fields()) {
            for (c, d) in f.coeffs.iter().zip(&g.coeffs) {
                assert_eq!(c.re.to_bits(), d.re.to_bits());
                assert_eq!(c.im.to_bits(), d.im.to_bits());
            }
        }
    }
    let bin = fs::metadata(dir.path().join("run.bin")).unwrap().len();
    assert_eq!(bin, 3 * 3 * 256 * 16);
}

#[test]
fn manifest_is_readable_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_snapshots(dir.path(), "m", &sample_set()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["format"], SNAPSHOT_FORMAT);
    assert_eq!(v["version"], SNAPSHOT_VERSION);
    assert_eq!(v["data"], "m.bin");
    assert_eq!(v["fields"], serde_json::json!(["rho", "m1", "m2"]));
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_snapshots(dir.path(), "bad", &sample_set()).unwrap();

    let bin = dir.path().join("bad.bin");
    let bytes = fs::read(&bin).unwrap();
    fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(read_snapshots(&path), Err(Error::Snapshot(_))));
    fs::write(&bin, &bytes).unwrap();

    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replace("cnslab-snapshot", "other")).unwrap();
    assert!(matches!(read_snapshots(&path), Err(Error::Snapshot(_))));
    fs::write(&path, "{ not json").unwrap();
    assert!(matches!(read_snapshots(&path), Err(Error::Json(_))));
    assert!(matches!(
        read_snapshots(&dir.path().join("missing.json")),
        Err(Error::Io(_))
    ));

    let mut set = sample_set();
    set.times.pop();
    assert!(matches!(
        write_snapshots(dir.path(), "x", &set),
        Err(Error::Shape { .. })
    ));
    let mut set = sample_set();
    set.states[0] = random_state(Grid::new(8, 7.5).unwrap(), 0);
    assert!(matches!(
        write_snapshots(dir.path(), "y", &set),
        Err(Error::GridMismatch)
    ));
}
