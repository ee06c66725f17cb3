//! Files written by the commands, and reading snapshots back.

use crate::error::{CliError, CliResult};
use crossdiff_core::diagnostics::{center_of_mass, compare_profile, MIN_SPEED_SAMPLES};
use crossdiff_core::analytic::Profile;
use crossdiff_core::{CellField, DiagnosticsReport, Grid, SnapshotSink, SystemState};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use tempfile::NamedTempFile;

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const SUMMARY: &str = "summary.csv";
pub const REPORT: &str = "report.json";
pub const FINAL: &str = "final.csv";
pub const PLOT: &str = "plot.gp";

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// A file that only appears under its name once it is complete.
pub struct AtomicFile {
    target: PathBuf,
    writer: BufWriter<NamedTempFile>,
}

impl AtomicFile {
    pub fn create(target: PathBuf) -> CliResult<Self> {
        let dir = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(&target, e))?;
        Ok(Self {
            target,
            writer: BufWriter::new(tmp),
        })
    }

    pub fn write_str(&mut self, s: &str) -> CliResult<()> {
        self.writer.write_all(s.as_bytes()).map_err(|e| CliError::io(&self.target, e))
    }

    pub fn commit(self) -> CliResult<PathBuf> {
        let target = self.target;
        let tmp = self.writer.into_inner().map_err(|e| CliError::io(&target, e.into_error()))?;
        let file = tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        // temp files are created owner-only
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            file.set_permissions(fs::Permissions::from_mode(0o644))
                .map_err(|e| CliError::io(&target, e))?;
        }
        drop(file);
        Ok(target)
    }
}

/// Writes `contents` to `dir/name` atomically.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let mut f = AtomicFile::create(dir.join(name))?;
    f.write_str(contents)?;
    f.commit()
}

pub fn csv_header() -> &'static str {
    "t,x,rho,eta\n"
}

fn state_rows(out: &mut String, s: &SystemState) {
    use std::fmt::Write as _;
    for (i, x) in s.grid.centers().iter().enumerate() {
        let _ = writeln!(out, "{:?},{:?},{:?},{:?}", s.time, x, s.rho[i], s.eta[i]);
    }
}

/// Collects diagnostics for every snapshot and streams them to a CSV.
pub struct RecordingSink<'a> {
    csv: Option<AtomicFile>,
    reference: Option<&'a dyn Profile>,
    pub reports: Vec<DiagnosticsReport>,
    pub times: Vec<f64>,
    pub centers: Vec<f64>,
    last_time: Option<f64>,
    failure: Option<CliError>,
}

impl<'a> RecordingSink<'a> {
    pub fn new(csv: Option<AtomicFile>, reference: Option<&'a dyn Profile>) -> CliResult<Self> {
        let mut csv = csv;
        if let Some(f) = csv.as_mut() {
            f.write_str(csv_header())?;
        }
        Ok(Self {
            csv,
            reference,
            reports: Vec::new(),
            times: Vec::new(),
            centers: Vec::new(),
            last_time: None,
            failure: None,
        })
    }

    /// Least-squares speed of rho's centre of mass, when there are enough snapshots.
    pub fn speed(&self) -> Option<f64> {
        if self.times.len() < 2 * MIN_SPEED_SAMPLES {
            return None;
        }
        crossdiff_core::diagnostics::measure_speed(&self.times, &self.centers).ok()
    }

    /// Finishes the CSV; the first write error seen during the run is returned here.
    pub fn finish(self) -> CliResult<(Option<PathBuf>, Vec<DiagnosticsReport>, Vec<f64>, Vec<f64>)> {
        if let Some(e) = self.failure {
            return Err(e);
        }
        let path = self.csv.map(|f| f.commit()).transpose()?;
        Ok((path, self.reports, self.times, self.centers))
    }
}

impl SnapshotSink for RecordingSink<'_> {
    fn record(&mut self, state: &SystemState) -> crossdiff_core::Result<()> {
        // the run closes with the final state, which may repeat the last snapshot
        if self.last_time == Some(state.time) {
            return Ok(());
        }
        self.last_time = Some(state.time);
        let mut r = DiagnosticsReport::of(state)?;
        if let Some(p) = self.reference {
            r = r.with_profile(state, p)?;
        }
        self.reports.push(r);
        if let Some(c) = center_of_mass(&state.rho, &state.grid) {
            self.times.push(state.time);
            self.centers.push(c);
        }
        if self.failure.is_none() {
            if let Some(f) = self.csv.as_mut() {
                let mut rows = String::with_capacity(state.grid.len() * 64);
                state_rows(&mut rows, state);
                if let Err(e) = f.write_str(&rows) {
                    self.failure = Some(e);
                }
            }
        }
        Ok(())
    }
}

pub fn summary_csv(reports: &[DiagnosticsReport]) -> String {
    use std::fmt::Write as _;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    let mut s = String::from(
        "t,mass_rho,mass_eta,first_moment_rho,first_moment_eta,second_moment_rho,second_moment_eta,energy,min_cell,l1_error,linf_error,measured_speed\n",
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}",
            r.time,
            r.mass_rho,
            r.mass_eta,
            r.first_moment_rho,
            r.first_moment_eta,
            r.second_moment_rho,
            r.second_moment_eta,
            r.energy,
            r.min_cell,
            opt(r.l1_error),
            opt(r.linf_error),
            opt(r.measured_speed)
        );
    }
    s
}

/// Final densities, with the reference (translated by `shift`) when given.
pub fn final_csv(state: &SystemState, reference: Option<(&dyn Profile, f64)>) -> String {
    use std::fmt::Write as _;
    let mut s = String::from(if reference.is_some() {
        "x,rho,eta,rho_ref,eta_ref\n"
    } else {
        "x,rho,eta\n"
    });
    for (i, &x) in state.grid.centers().iter().enumerate() {
        let _ = write!(s, "{:?},{:?},{:?}", x, state.rho[i], state.eta[i]);
        if let Some((p, shift)) = reference {
            let (r, e) = p.eval_at(x - shift, state.time);
            let _ = write!(s, ",{r:?},{e:?}");
        }
        s.push('\n');
    }
    s
}

/// Gnuplot script drawing `final.csv`.
pub fn gnuplot_script(title: &str, with_reference: bool) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key top right\nset xlabel 'x'\nset ylabel 'density'\nset title '{}'\nset terminal pngcairo size 900,500\nset output 'final.png'\n",
        title.replace('\'', "")
    );
    s.push_str("plot 'final.csv' using 1:2 skip 1 with lines lw 2 lc rgb '#c0392b' title 'rho', \\\n");
    if with_reference {
        s.push_str("     'final.csv' using 1:3 skip 1 with lines lw 2 lc rgb '#2e6bb0' title 'eta', \\\n");
        s.push_str("     'final.csv' using 1:4 skip 1 with lines dt 2 lc rgb 'black' title 'rho (analytic)', \\\n");
        s.push_str("     'final.csv' using 1:5 skip 1 with lines dt 3 lc rgb 'black' title 'eta (analytic)'\n");
    } else {
        s.push_str("     'final.csv' using 1:3 skip 1 with lines lw 2 lc rgb '#2e6bb0' title 'eta'\n");
    }
    s
}

/// All snapshots of a `t,x,rho,eta` file, on the grid their centres describe.
pub fn read_snapshots(path: &Path) -> CliResult<Vec<SystemState>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::input(path, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| CliError::input(path, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "x", "rho", "eta"] {
        return Err(CliError::input(path, "expected columns t,x,rho,eta"));
    }
    let mut blocks: Vec<(f64, Vec<[f64; 3]>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, e.to_string()))?;
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| CliError::input(path, format!("row {}: `{field}` is not a number", k + 2)))?;
        }
        match blocks.last_mut() {
            Some((t, rows)) if *t == v[0] => rows.push([v[1], v[2], v[3]]),
            _ => blocks.push((v[0], vec![[v[1], v[2], v[3]]])),
        }
    }
    let first = blocks.first().ok_or_else(|| CliError::input(path, "no snapshots"))?;
    let grid = grid_from_centers(&first.1.iter().map(|r| r[0]).collect::<Vec<_>>())
        .ok_or_else(|| CliError::input(path, "x column is not a uniform cell-centred grid"))?;
    let mut out = Vec::with_capacity(blocks.len());
    for (t, rows) in blocks {
        if rows.len() != grid.len() || rows.iter().zip(grid.centers()).any(|(r, c)| (r[0] - c).abs() > 1e-9 * grid.half_width())
        {
            return Err(CliError::input(path, format!("snapshot at t = {t} is on a different grid")));
        }
        let rho = CellField::new(rows.iter().map(|r| r[1]).collect()).map_err(|e| CliError::input(path, e.to_string()))?;
        let eta = CellField::new(rows.iter().map(|r| r[2]).collect()).map_err(|e| CliError::input(path, e.to_string()))?;
        out.push(SystemState::new(grid.clone(), rho, eta, t).map_err(|e| CliError::input(path, e.to_string()))?);
    }
    Ok(out)
}

/// The symmetric grid whose cell centres are `xs`, if there is one.
pub fn grid_from_centers(xs: &[f64]) -> Option<Grid> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len();
    let l = (xs[n - 1] - xs[0]) * n as f64 / (2.0 * (n - 1) as f64);
    let g = Grid::new(l, n).ok()?;
    xs.iter()
        .zip(g.centers())
        .all(|(a, b)| (a - b).abs() <= 1e-9 * l)
        .then_some(g)
}

/// Aligned distances to a reference, for the report.
pub fn final_comparison(
    state: &SystemState,
    reference: &dyn Profile,
) -> crossdiff_core::Result<crossdiff_core::diagnostics::ProfileComparison> {
    compare_profile(state, reference, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_recovered_from_centres() {
        let g = Grid::new(3.0, 7).unwrap();
        assert!(grid_from_centers(g.centers()).unwrap().matches(&g));
        assert!(grid_from_centers(&[0.0, 1.0, 3.0]).is_none());
        assert!(grid_from_centers(&[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn snapshots_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(1.0, 5).unwrap();
        let s = |t: f64, k: f64| {
            SystemState::new(
                g.clone(),
                CellField::new(vec![0.0, k, 0.1 / 3.0, 2.0, 0.0]).unwrap(),
                CellField::new(vec![1e-300, 0.0, 0.0, 0.5, 7.25]).unwrap(),
                t,
            )
            .unwrap()
        };
        let f = AtomicFile::create(dir.path().join(SNAPSHOTS)).unwrap();
        let mut sink = RecordingSink::new(Some(f), None).unwrap();
        for (t, k) in [(0.0, 1.0), (0.5, 2.0), (0.5, 2.0)] {
            sink.record(&s(t, k)).unwrap();
        }
        let (path, reports, _, _) = sink.finish().unwrap();
        assert_eq!(reports.len(), 2);
        let back = read_snapshots(&path.unwrap()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1], s(0.5, 2.0));
    }

    #[test]
    fn uncommitted_file_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut f = AtomicFile::create(dir.path().join("x.csv")).unwrap();
            f.write_str("partial").unwrap();
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn bad_snapshot_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "t,x,rho\n0,0,0\n").unwrap();
        assert!(read_snapshots(&p).is_err());
        fs::write(&p, "t,x,rho,eta\n0,-0.5,1,0\n0,0.5,abc,0\n").unwrap();
        assert!(read_snapshots(&p).unwrap_err().to_string().contains("row 3"));
        fs::write(&p, "t,x,rho,eta\n").unwrap();
        assert!(read_snapshots(&p).is_err());
    }
}
