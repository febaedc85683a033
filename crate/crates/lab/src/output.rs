//! CSV and JSON renderings of a [`SensitivityReport`].

use std::io;
use std::path::{Path, PathBuf};

use dgsm_core::SensitivityReport;
use serde::Serialize;

use crate::config::Format;
use crate::error::{LabError, Result};

pub const CSV_HEADER: [&str; 9] = ["input", "S", "S_sd", "ST", "ST_sd", "nu", "tau", "C", "upsilon"];

/// `%g`-style rendering with six significant digits.
pub fn six_digits(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

pub fn write_csv<W: io::Write>(report: &SensitivityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| LabError::Write { path: PathBuf::from("<csv>"), source: e.into() };
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for rec in &report.inputs {
        w.write_record([
            rec.name.clone(),
            six_digits(rec.first_order.mean),
            six_digits(rec.first_order.sd),
            six_digits(rec.total.mean),
            six_digits(rec.total.sd),
            six_digits(rec.nu),
            rec.tau.map(six_digits).unwrap_or_default(),
            six_digits(rec.constant.c),
            six_digits(rec.upsilon),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| LabError::Write { path: PathBuf::from("<csv>"), source: e })?;
    Ok(())
}

pub fn csv_string(report: &SensitivityReport) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Pretty JSON that writes every float with 17 significant digits.
struct FullPrecision<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn write_json<W: io::Write>(report: &SensitivityReport, out: W) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(
        out,
        FullPrecision(serde_json::ser::PrettyFormatter::new()),
    );
    report.serialize(&mut ser).map_err(|e| LabError::Write {
        path: PathBuf::from("<json>"),
        source: io::Error::other(e),
    })?;
    let mut out = ser.into_inner();
    writeln!(out).map_err(|e| LabError::Write { path: PathBuf::from("<json>"), source: e })
}

pub fn json_string(report: &SensitivityReport) -> Result<String> {
    let mut buf = Vec::new();
    write_json(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("json output is utf-8"))
}

pub fn read_json(text: &str) -> serde_json::Result<SensitivityReport> {
    serde_json::from_str(text)
}

pub fn file_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "report.csv",
        Format::Json => "report.json",
    }
}

pub fn render(report: &SensitivityReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => csv_string(report),
        Format::Json => json_string(report),
    }
}

/// Write one file per format into `dir`, creating it if needed.
pub fn write_files(report: &SensitivityReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| LabError::Write { path: dir.to_owned(), source })?;
    formats
        .iter()
        .map(|&f| {
            let path = dir.join(file_name(f));
            std::fs::write(&path, render(report, f)?)
                .map_err(|source| LabError::Write { path: path.clone(), source })?;
            Ok(path)
        })
        .collect()
}
