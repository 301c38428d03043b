//! Trajectory CSV: `t,side,phi,x,px,py,dir,singular`, one row per bounce.
//!
//! Floats are written with 17 significant digits so that parsing recovers the
//! exact doubles. `dir` is the move leaving the row's bounce (empty on the last
//! row); `singular` is `1` on the last row when the next landing was a vertex.

use std::io::{Read, Write};

use crate::billiard::{Billiard, MoveDir, Orbit, PhaseState, Stepper};
use crate::error::{Error, Result};
use crate::geometry::Side;

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "side", "phi", "x", "px", "py", "dir", "singular"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub state: PhaseState,
    pub px: f64,
    pub py: f64,
    pub dir: Option<MoveDir>,
    pub singular: bool,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory<W: Write>(out: W, billiard: &Billiard, orbit: &Orbit) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    let last = orbit.states().len() - 1;
    for (t, s) in orbit.states().iter().enumerate() {
        let p = billiard.embedding().boundary_to_plane(s.boundary_point());
        let dir = orbit.dirs().get(t).map_or("", |d| d.as_str());
        let singular = t == last && orbit.terminated_singular();
        w.write_record([
            t.to_string(),
            s.side.number().to_string(),
            fmt_f64(s.phi),
            fmt_f64(s.x),
            fmt_f64(p.x),
            fmt_f64(p.y),
            dir.to_string(),
            u8::from(singular).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_csv(billiard: &Billiard, orbit: &Orbit) -> Result<String> {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, billiard, orbit)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    rec.get(i).ok_or_else(|| {
        Error::Parse(format!(
            "line {line}: missing column {}",
            TRAJECTORY_HEADER[i]
        ))
    })
}

fn parse_f64(s: &str, name: &str, line: usize) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} {s:?}")))
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected header {:?}, expected {}",
            header.iter().collect::<Vec<_>>(),
            TRAJECTORY_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let t: usize = field(&rec, 0, line)?
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad t")))?;
        let side: u8 = field(&rec, 1, line)?
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad side")))?;
        let dir = match field(&rec, 6, line)? {
            "" => None,
            d => Some(d.parse()?),
        };
        let singular = match field(&rec, 7, line)? {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse(format!(
                    "line {line}: bad singular flag {other:?}"
                )))
            }
        };
        rows.push(TrajectoryRow {
            t,
            state: PhaseState::new(
                Side::from_number(side)?,
                parse_f64(field(&rec, 2, line)?, "phi", line)?,
                parse_f64(field(&rec, 3, line)?, "x", line)?,
            ),
            px: parse_f64(field(&rec, 4, line)?, "px", line)?,
            py: parse_f64(field(&rec, 5, line)?, "py", line)?,
            dir,
            singular,
        });
    }
    Ok(rows)
}

/// Re-runs the orbit from row 0 and returns the largest deviation in
/// `(phi, x, px, py)` over all rows. Fails if the side or move sequence differs.
pub fn replay_trajectory(
    billiard: &Billiard,
    rows: &[TrajectoryRow],
    stepper: Stepper,
) -> Result<f64> {
    let Some(head) = rows.first() else {
        return Err(Error::Parse("empty trajectory".into()));
    };
    let orbit = billiard.iterate(head.state, rows.len() - 1, stepper)?;
    if orbit.states().len() != rows.len() {
        return Err(Error::Parse(format!(
            "replay produced {} bounces, file has {}",
            orbit.states().len(),
            rows.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (t, (row, s)) in rows.iter().zip(orbit.states()).enumerate() {
        if row.t != t || row.state.side != s.side || row.dir != orbit.dirs().get(t).copied() {
            return Err(Error::Parse(format!("row {t} diverges from replay")));
        }
        let p = billiard.embedding().boundary_to_plane(s.boundary_point());
        worst = worst
            .max((row.state.phi - s.phi).abs())
            .max((row.state.x - s.x).abs())
            .max((row.px - p.x).abs())
            .max((row.py - p.y).abs());
    }
    Ok(worst)
}
