//! Per-step drive logs and their CSV form.
//!
//! A file starts with the comment line [`SCHEMA_LINE`], then a header row
//! with [`COLUMNS`], then one row per step. Floats use the shortest text
//! that parses back to the same value, so a write/read round trip is exact.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::authority::AssistMode;
use crate::consistency::Verdict;
use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# shared-steer drive-log v1";

pub const COLUMNS: [&str; 26] = [
    "t",
    "x",
    "y",
    "psi",
    "v_x",
    "v_y",
    "r",
    "theta_sw",
    "theta_sw_dot",
    "tau_driver",
    "tau_hapi",
    "tau_hapa",
    "K_h",
    "mode",
    "verdict",
    "intent",
    "e_y",
    "e_theta",
    "e_theta_dot",
    "W_hapi",
    "W_dr",
    "S_c",
    "head_yaw",
    "lane_id",
    "K_shifting",
    "replanned",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub r: f64,
    pub theta_sw: f64,
    pub theta_sw_dot: f64,
    pub tau_driver: f64,
    pub tau_hapi: f64,
    pub tau_hapa: f64,
    pub k_h: f64,
    pub mode: AssistMode,
    pub verdict: Verdict,
    pub intent: bool,
    pub e_y: f64,
    pub e_theta: f64,
    pub e_theta_dot: f64,
    pub w_hapi: f64,
    pub w_dr: f64,
    pub s_c: f64,
    pub head_yaw: f64,
    pub lane_id: usize,
    pub k_shifting: f64,
    pub replanned: bool,
}

impl LogRecord {
    /// Appends one CSV row, newline included. No field ever needs quoting.
    fn write_row(&self, out: &mut Vec<u8>, fmt: &mut ryu::Buffer) {
        let floats = [
            self.t,
            self.x,
            self.y,
            self.psi,
            self.v_x,
            self.v_y,
            self.r,
            self.theta_sw,
            self.theta_sw_dot,
            self.tau_driver,
            self.tau_hapi,
            self.tau_hapa,
            self.k_h,
        ];
        for v in floats {
            out.extend_from_slice(fmt.format(v).as_bytes());
            out.push(b',');
        }
        out.extend_from_slice(self.mode.label().as_bytes());
        out.push(b',');
        out.push(b'0' + self.verdict.as_flag());
        out.push(b',');
        out.push(if self.intent { b'1' } else { b'0' });
        for v in [self.e_y, self.e_theta, self.e_theta_dot, self.w_hapi, self.w_dr, self.s_c, self.head_yaw] {
            out.push(b',');
            out.extend_from_slice(fmt.format(v).as_bytes());
        }
        out.push(b',');
        out.extend_from_slice(self.lane_id.to_string().as_bytes());
        out.push(b',');
        out.extend_from_slice(fmt.format(self.k_shifting).as_bytes());
        out.push(b',');
        out.push(if self.replanned { b'1' } else { b'0' });
        out.push(b'\n');
    }

    fn from_fields(row: &csv::StringRecord, line: u64) -> Result<Self> {
        if row.len() != COLUMNS.len() {
            return Err(Error::Contract(format!("line {line}: expected {} fields, found {}", COLUMNS.len(), row.len())));
        }
        let num = |i: usize| -> Result<f64> {
            row[i].parse::<f64>().map_err(|e| Error::Contract(format!("line {line}, column {}: {e}", COLUMNS[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            match &row[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Contract(format!("line {line}, column {}: bad flag {other:?}", COLUMNS[i]))),
            }
        };
        let mode = match &row[13] {
            "LK" => AssistMode::LaneKeep,
            "LC" => AssistMode::LaneChange,
            other => return Err(Error::Contract(format!("line {line}: bad mode {other:?}"))),
        };
        let verdict = if flag(14)? { Verdict::Inconsistent } else { Verdict::Consistent };
        let lane_id =
            row[23].parse::<usize>().map_err(|e| Error::Contract(format!("line {line}, column lane_id: {e}")))?;
        Ok(LogRecord {
            t: num(0)?,
            x: num(1)?,
            y: num(2)?,
            psi: num(3)?,
            v_x: num(4)?,
            v_y: num(5)?,
            r: num(6)?,
            theta_sw: num(7)?,
            theta_sw_dot: num(8)?,
            tau_driver: num(9)?,
            tau_hapi: num(10)?,
            tau_hapa: num(11)?,
            k_h: num(12)?,
            mode,
            verdict,
            intent: flag(15)?,
            e_y: num(16)?,
            e_theta: num(17)?,
            e_theta_dot: num(18)?,
            w_hapi: num(19)?,
            w_dr: num(20)?,
            s_c: num(21)?,
            head_yaw: num(22)?,
            lane_id,
            k_shifting: num(24)?,
            replanned: flag(25)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveLog {
    pub condition: String,
    pub seed: u64,
    pub dt: f64,
    pub records: Vec<LogRecord>,
}

impl DriveLog {
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.condition, self.seed)
    }

    pub fn column(&self, f: impl Fn(&LogRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = Vec::with_capacity(64 * 1024);
        writeln!(buf, "{SCHEMA_LINE}")?;
        writeln!(buf, "{}", COLUMNS.join(","))?;
        let mut fmt = ryu::Buffer::new();
        for r in &self.records {
            r.write_row(&mut buf, &mut fmt);
            if buf.len() >= 60 * 1024 {
                out.write_all(&buf)?;
                buf.clear();
            }
        }
        out.write_all(&buf)?;
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Contract(e.to_string()))
    }

    /// Writes `{dir}/{condition}_{seed}.csv` through a temporary file and a
    /// rename, so readers never observe a partial log.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        write_atomic(&path, &buf)?;
        Ok(path)
    }

    /// Parses a log. Condition and seed come from the file name when it
    /// follows the `{condition}_{seed}.csv` pattern; `dt` from the time column.
    pub fn read_csv<R: Read>(input: R, condition: &str, seed: u64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(input);
        let header = reader.headers()?.clone();
        if header.iter().ne(COLUMNS.iter().copied()) {
            return Err(Error::Contract(format!("unexpected CSV header: {header:?}")));
        }
        let mut records = Vec::new();
        for (i, row) in reader.records().enumerate() {
            records.push(LogRecord::from_fields(&row?, i as u64 + 3)?);
        }
        let dt = match records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 0.0,
        };
        Ok(DriveLog { condition: condition.to_string(), seed, dt, records })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let (condition, seed) = match stem.rsplit_once('_') {
            Some((c, s)) => (c.to_string(), s.parse().unwrap_or(0)),
            None => (stem.to_string(), 0),
        };
        DriveLog::read_csv(fs::File::open(path)?, &condition, seed)
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
