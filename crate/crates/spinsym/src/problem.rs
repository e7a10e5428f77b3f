//! Line-oriented sectioned input format for the command-line front end.
//!
//! ```text
//! # comments start with '#'
//! [chart]
//! dim = 4
//! lo = 0, 0, 0, 0
//! hi = 1, 1, 1, 1
//! periodic = true, true, true, true
//! n = 16
//!
//! [frame]
//! e1 = 1, 0, 0, 0
//! e2 = 0, 1, 0, 0
//! e3 = 0, 0, 1, 0
//! e4 = 0, 0, 0, 1
//! ```
//!
//! Exactly one of `[frame]` / `[operator.*]` must be present. Operator
//! coefficients are given entrywise as real and imaginary expression tables
//! `[operator.F1.re]`, `[operator.F1.im]`, ..., `[operator.G.re]`, ... with
//! keys `m11`, `m12`, `m21`, `m22`; a missing `.im` table means zero.
//! Optional blocks: `[frame2]` (equivalence runs), `[potential]` (`A = ...`),
//! `[q]` (`q = ...`), and `[gauge]` (`group = sl2c|su2`) with entry tables
//! `[gauge.re]` / `[gauge.im]`.

use crate::error::{Error, Result};
use crate::expr::{parse, ComplexExpr, Expr};
use crate::fields::{Chart, Mat2Field, VectorField, VectorFieldSet};
use crate::gauge::GaugeGroup;
use crate::symbols::{Frame, OperatorData};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
struct Section {
    line: usize,
    entries: Vec<(String, String, usize)>,
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::ProblemFile {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(Error::ProblemFile {
                    line: line_no,
                    message: format!("duplicate section `[{name}]`"),
                });
            }
            sections.insert(name.clone(), Section { line: line_no, entries: Vec::new() });
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ProblemFile {
            line: line_no,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let section = current.as_ref().ok_or_else(|| Error::ProblemFile {
            line: line_no,
            message: "entry outside of any section".into(),
        })?;
        sections
            .get_mut(section)
            .unwrap()
            .entries
            .push((key.trim().to_string(), value.trim().to_string(), line_no));
    }
    Ok(sections)
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str, name: &str) -> Result<(&str, usize)> {
        self.get(key).ok_or_else(|| Error::ProblemFile {
            line: self.line,
            message: format!("section `[{name}]` is missing key `{key}`"),
        })
    }
}

fn parse_list<T, F>(value: &str, line: usize, mut item: F) -> Result<Vec<T>>
where
    F: FnMut(&str) -> Result<T>,
{
    value
        .split(',')
        .map(|part| {
            item(part.trim()).map_err(|e| Error::ProblemFile {
                line,
                message: format!("bad list item `{}`: {e}", part.trim()),
            })
        })
        .collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Invalid("not a number".into()))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Invalid("not a boolean".into())),
    }
}

fn parse_exprs(value: &str, line: usize, dim: usize) -> Result<Vec<Expr>> {
    parse_list(value, line, |s| parse(s, dim))
}

/// Expression tables for the operator coefficients F^1..F^dim and G.
#[derive(Debug, Clone)]
pub struct OperatorExprs {
    pub f: Vec<[[ComplexExpr; 2]; 2]>,
    pub g: [[ComplexExpr; 2]; 2],
}

/// A fully parsed problem file; fields are expression tables that are
/// instantiated against a chart (possibly with overridden resolution).
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub chart: Chart,
    pub frame: Option<Vec<Vec<Expr>>>,
    pub frame2: Option<Vec<Vec<Expr>>>,
    pub operator: Option<OperatorExprs>,
    pub potential: Option<Vec<Expr>>,
    pub q: Option<Vec<Expr>>,
    pub gauge: Option<(GaugeGroup, [[ComplexExpr; 2]; 2])>,
}

fn parse_chart(section: &Section) -> Result<Chart> {
    let (dim_str, dim_line) = section.require("dim", "chart")?;
    let dim: usize = dim_str.parse().map_err(|_| Error::ProblemFile {
        line: dim_line,
        message: format!("bad dimension `{dim_str}`"),
    })?;
    let (lo, lo_line) = section.require("lo", "chart")?;
    let lo = parse_list(lo, lo_line, parse_f64)?;
    let (hi, hi_line) = section.require("hi", "chart")?;
    let hi = parse_list(hi, hi_line, parse_f64)?;
    let (per, per_line) = section.require("periodic", "chart")?;
    let periodic = parse_list(per, per_line, parse_bool)?;
    let (n_str, n_line) = section.require("n", "chart")?;
    let n = parse_list(n_str, n_line, |s| {
        s.parse::<usize>().map_err(|_| Error::Invalid("not an integer".into()))
    })?;
    let n = if n.len() == 1 { vec![n[0]; dim] } else { n };
    Chart::new(dim, lo, hi, periodic, n).map_err(|e| Error::ProblemFile {
        line: section.line,
        message: e.to_string(),
    })
}

fn parse_frame_rows(section: &Section, name: &str, dim: usize) -> Result<Vec<Vec<Expr>>> {
    let mut rows = Vec::with_capacity(dim);
    for j in 1..=dim {
        let key = format!("e{j}");
        let (value, line) = section.require(&key, name)?;
        let row = parse_exprs(value, line, dim)?;
        if row.len() != dim {
            return Err(Error::ProblemFile {
                line,
                message: format!("`{key}` needs {dim} components, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_entry_table(
    sections: &BTreeMap<String, Section>,
    base: &str,
    dim: usize,
) -> Result<Option<[[ComplexExpr; 2]; 2]>> {
    let re_name = format!("{base}.re");
    let im_name = format!("{base}.im");
    let re = sections.get(&re_name);
    let im = sections.get(&im_name);
    if re.is_none() && im.is_none() {
        return Ok(None);
    }
    let entry = |row: usize, col: usize| -> Result<ComplexExpr> {
        let key = format!("m{row}{col}");
        let part = |sec: Option<&Section>, name: &str| -> Result<Expr> {
            match sec {
                None => parse("0", dim),
                Some(s) => match s.get(&key) {
                    None => parse("0", dim),
                    Some((value, line)) => parse(value, dim).map_err(|e| Error::ProblemFile {
                        line,
                        message: format!("in `[{name}]` entry `{key}`: {e}"),
                    }),
                },
            }
        };
        Ok(ComplexExpr::new(part(re, &re_name)?, part(im, &im_name)?))
    };
    Ok(Some([
        [entry(1, 1)?, entry(1, 2)?],
        [entry(2, 1)?, entry(2, 2)?],
    ]))
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let sections = split_sections(text)?;
    let chart_section = sections.get("chart").ok_or_else(|| Error::ProblemFile {
        line: 1,
        message: "missing `[chart]` section".into(),
    })?;
    let chart = parse_chart(chart_section)?;
    let dim = chart.dim;

    let frame = sections
        .get("frame")
        .map(|s| parse_frame_rows(s, "frame", dim))
        .transpose()?;
    let frame2 = sections
        .get("frame2")
        .map(|s| parse_frame_rows(s, "frame2", dim))
        .transpose()?;

    let mut operator = None;
    if sections.keys().any(|k| k.starts_with("operator.")) {
        let mut f = Vec::with_capacity(dim);
        for a in 1..=dim {
            let table = parse_entry_table(&sections, &format!("operator.F{a}"), dim)?
                .ok_or_else(|| Error::ProblemFile {
                    line: 1,
                    message: format!("operator block is missing `[operator.F{a}.re]`"),
                })?;
            f.push(table);
        }
        let g = parse_entry_table(&sections, "operator.G", dim)?.ok_or_else(|| {
            Error::ProblemFile {
                line: 1,
                message: "operator block is missing `[operator.G.re]`".into(),
            }
        })?;
        operator = Some(OperatorExprs { f, g });
    }

    if frame.is_some() == operator.is_some() {
        return Err(Error::ProblemFile {
            line: 1,
            message: "exactly one of `[frame]` or `[operator.*]` must be present".into(),
        });
    }

    let vector_block = |name: &str, key: &str| -> Result<Option<Vec<Expr>>> {
        match sections.get(name) {
            None => Ok(None),
            Some(s) => {
                let (value, line) = s.require(key, name)?;
                let v = parse_exprs(value, line, dim)?;
                if v.len() != dim {
                    return Err(Error::ProblemFile {
                        line,
                        message: format!("`{key}` needs {dim} components, got {}", v.len()),
                    });
                }
                Ok(Some(v))
            }
        }
    };
    let potential = vector_block("potential", "A")?;
    let q = vector_block("q", "q")?;

    let mut gauge = None;
    if let Some(s) = sections.get("gauge") {
        let (group, line) = s.require("group", "gauge")?;
        let group = match group {
            "sl2c" => GaugeGroup::Sl2c,
            "su2" => GaugeGroup::Su2,
            other => {
                return Err(Error::ProblemFile {
                    line,
                    message: format!("unknown gauge group `{other}` (expected sl2c or su2)"),
                })
            }
        };
        let table = parse_entry_table(&sections, "gauge", dim)?.ok_or_else(|| {
            Error::ProblemFile {
                line: s.line,
                message: "gauge block needs `[gauge.re]` entries".into(),
            }
        })?;
        gauge = Some((group, table));
    }

    // reject unknown sections to catch typos early
    for (name, section) in &sections {
        let known = name == "chart"
            || name == "frame"
            || name == "frame2"
            || name == "potential"
            || name == "q"
            || name == "gauge"
            || name == "gauge.re"
            || name == "gauge.im"
            || (name.starts_with("operator.")
                && (name.ends_with(".re") || name.ends_with(".im")));
        if !known {
            return Err(Error::ProblemFile {
                line: section.line,
                message: format!("unknown section `[{name}]`"),
            });
        }
    }

    Ok(ProblemFile { chart, frame, frame2, operator, potential, q, gauge })
}

pub fn load_problem(path: &std::path::Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

impl ProblemFile {
    /// Chart with the resolution override applied.
    pub fn chart_with(&self, grid: Option<usize>) -> Chart {
        match grid {
            Some(n) => self.chart.with_resolution(n),
            None => self.chart.clone(),
        }
    }

    pub fn build_frame(&self, chart: &Chart) -> Result<Option<Frame>> {
        self.instantiate_frame(chart, &self.frame)
    }

    pub fn build_frame2(&self, chart: &Chart) -> Result<Option<Frame>> {
        self.instantiate_frame(chart, &self.frame2)
    }

    fn instantiate_frame(
        &self,
        chart: &Chart,
        rows: &Option<Vec<Vec<Expr>>>,
    ) -> Result<Option<Frame>> {
        match rows {
            None => Ok(None),
            Some(rows) => {
                let set = VectorFieldSet::new(chart.dim, rows.clone())?;
                Ok(Some(Frame::from_exprs(chart.clone(), set)?))
            }
        }
    }

    pub fn build_operator(&self, chart: &Chart) -> Result<Option<OperatorData>> {
        match &self.operator {
            None => Ok(None),
            Some(op) => {
                let f_coeffs = op
                    .f
                    .iter()
                    .map(|table| Mat2Field::from_exprs(chart.clone(), table.clone()))
                    .collect();
                let g = Mat2Field::from_exprs(chart.clone(), op.g.clone());
                Ok(Some(OperatorData::new(chart.clone(), f_coeffs, g)?))
            }
        }
    }

    pub fn build_potential(&self, chart: &Chart) -> Option<VectorField> {
        self.potential
            .as_ref()
            .map(|v| VectorField::from_exprs(chart.clone(), v.clone()))
    }

    pub fn build_q(&self, chart: &Chart) -> Option<VectorField> {
        self.q
            .as_ref()
            .map(|v| VectorField::from_exprs(chart.clone(), v.clone()))
    }

    pub fn build_gauge_field(&self, chart: &Chart) -> Option<(GaugeGroup, Mat2Field)> {
        self.gauge
            .as_ref()
            .map(|(group, table)| (*group, Mat2Field::from_exprs(chart.clone(), table.clone())))
    }
}
