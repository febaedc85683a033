//! Black-box models run as a subprocess.
//!
//! Protocol: the command receives one CSV row of `d` values per point on
//! standard input (no header, `,` delimiter, 17 significant digits) and must
//! print one value per row on standard output, in order, then exit with
//! status 0. Each batch is one process invocation, run through `sh -c` in
//! the configured working directory.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use dgsm_core::{Error, Matrix, Model, Result};

/// Longest stderr excerpt carried in an error.
const STDERR_EXCERPT: usize = 2000;

#[derive(Debug, Clone)]
pub struct ExternalModel {
    command: String,
    workdir: PathBuf,
    dimension: usize,
    name: String,
}

impl ExternalModel {
    pub fn new(command: impl Into<String>, workdir: impl Into<PathBuf>, dimension: usize) -> Self {
        let command = command.into();
        Self { name: format!("external: {command}"), command, workdir: workdir.into(), dimension }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn run(&self, points: &Matrix) -> Result<Vec<f64>> {
        let fail = |what: String| Error::Evaluation(format!("{}: {what}", self.command));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .current_dir(&self.workdir)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| fail(format!("cannot start in {}: {e}", self.workdir.display())))?;

        let input = encode_rows(points);
        let mut stdin = child.stdin.take().expect("stdin is piped");
        // a separate writer keeps large batches from deadlocking on full pipes
        let writer = std::thread::spawn(move || {
            // the child may exit early; that shows up in its status
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stderr_pipe = child.stderr.take().expect("stderr is piped");
        let stderr_reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr_pipe.read_to_end(&mut buf);
            buf
        });
        let mut stdout = String::new();
        child
            .stdout
            .take()
            .expect("stdout is piped")
            .read_to_string(&mut stdout)
            .map_err(|e| fail(format!("reading output: {e}")))?;
        let status = child.wait().map_err(|e| fail(format!("waiting for process: {e}")))?;
        let _ = writer.join();
        let stderr = stderr_reader.join().unwrap_or_default();
        let stderr = excerpt(&String::from_utf8_lossy(&stderr));

        if !status.success() {
            return Err(fail(format!("exited with {status}; stderr: {stderr}")));
        }
        let values = stdout
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                line.trim().parse::<f64>().map_err(|_| {
                    fail(format!("line {}: cannot parse {:?} as a number; stderr: {stderr}", i + 1, line))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != points.nrows() {
            return Err(fail(format!(
                "row count mismatch: {} inputs, {} outputs; stderr: {stderr}",
                points.nrows(),
                values.len()
            )));
        }
        Ok(values)
    }
}

fn encode_rows(points: &Matrix) -> String {
    let mut out = String::with_capacity(points.nrows() * points.ncols() * 24);
    for row in points.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

fn excerpt(s: &str) -> String {
    let s = s.trim();
    if s.is_empty() {
        return "(empty)".into();
    }
    match s.char_indices().nth(STDERR_EXCERPT) {
        Some((cut, _)) => format!("{}…", &s[..cut]),
        None => s.to_owned(),
    }
}

impl Model for ExternalModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let m = Matrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.evaluate_batch(&m)?[0])
    }

    fn evaluate_batch(&self, points: &Matrix) -> Result<Vec<f64>> {
        if points.ncols() != self.dimension {
            return Err(Error::Shape(format!(
                "model takes {} inputs, points have {} columns",
                self.dimension,
                points.ncols()
            )));
        }
        if points.nrows() == 0 {
            return Ok(Vec::new());
        }
        self.run(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_keep_full_precision() {
        let m = Matrix::from_rows(&[[0.1, 1.0 / 3.0], [-2.5e-300, 1e22]]).unwrap();
        let text = encode_rows(&m);
        let parsed: Vec<f64> =
            text.lines().flat_map(|l| l.split(',')).map(|f| f.parse().unwrap()).collect();
        assert_eq!(parsed, m.as_slice());
        assert_eq!(text.lines().next().unwrap(), "1.0000000000000001e-1,3.3333333333333331e-1");
    }

    #[test]
    fn excerpt_is_bounded() {
        assert_eq!(excerpt("  \n"), "(empty)");
        assert_eq!(excerpt(" oops \n"), "oops");
        assert_eq!(excerpt(&"x".repeat(5000)).chars().count(), STDERR_EXCERPT + 1);
    }
}
