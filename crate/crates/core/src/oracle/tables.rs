//! Recovery of the undisclosed parameters behind the published result tables,
//! and regeneration of every printed cell from them.
//!
//! Every cell has the shape `S1 = (a/b + b)/2`, `S2 = (k/2)(a/b − b)`. For the
//! signature table `a` is the message byte and `b` the fixed randomizer `r`;
//! for the subliminal table `a` is the cover byte and `b` the secret byte, with
//! the shorter of the two padded by a single pad byte. The moduli never
//! reduce anything at these magnitudes, so they leave no trace and are not
//! recovered.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{pow, Signed, ToPrimitive, Zero};

use super::rational::{decimal_places, parse_decimal, render_decimal, Rational};
use super::Scheme;
use crate::codec::{block_tokens, END_MARKER};
use crate::error::{Error, Result};

/// Upper bound of the brute-force search for `r` and `k`.
pub const SEARCH_LIMIT: u32 = 100_000;

/// Per-cell acceptance: `|printed − fitted| ≤ 5·10⁻¹¹ · |fitted|`.
pub fn relative_tolerance() -> Rational {
    Rational::new(BigInt::from(5), pow(BigInt::from(10), 11))
}

const FIXTURE_HEADER: &str = "oss-table v1";
const DEFAULT_PAD: u8 = b' ';

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedValue {
    pub text: String,
    pub value: Rational,
}

impl PrintedValue {
    pub fn parse(text: &str) -> Option<Self> {
        Some(PrintedValue {
            text: text.to_string(),
            value: parse_decimal(text)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    /// The message as printed.
    pub message: Vec<u8>,
    /// The text the pairs were actually computed from, when it differs.
    pub signed: Option<Vec<u8>>,
    pub cells: Vec<(PrintedValue, PrintedValue)>,
}

impl TableRow {
    pub fn signed_text(&self) -> &[u8] {
        self.signed.as_deref().unwrap_or(&self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFixture {
    pub scheme: Scheme,
    pub title: String,
    pub cover: Option<Vec<u8>>,
    pub rows: Vec<TableRow>,
}

/// Line-oriented fixture: an `oss-table v1 <scheme>` header, optional
/// `title`/`cover` lines, `#` comments, then per row a `message` line, an
/// optional `signed` line and a signature block of printed decimals.
pub fn parse_table_fixture(text: &str) -> Result<TableFixture> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Malformed("empty fixture".into()))?;
    let scheme = match header.strip_prefix(FIXTURE_HEADER).map(str::trim) {
        Some("signature") => Scheme::Signature,
        Some("subliminal") => Scheme::Subliminal,
        _ => return Err(Error::UnsupportedVersion(header.to_string())),
    };
    let mut fixture = TableFixture {
        scheme,
        title: String::new(),
        cover: None,
        rows: Vec::new(),
    };
    while let Some(line) = lines.next() {
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "title" => fixture.title = value.to_string(),
            "cover" => fixture.cover = Some(value.as_bytes().to_vec()),
            "message" => fixture.rows.push(TableRow {
                message: value.as_bytes().to_vec(),
                signed: None,
                cells: Vec::new(),
            }),
            "signed" => {
                let row = fixture
                    .rows
                    .last_mut()
                    .ok_or_else(|| Error::Malformed("`signed` before `message`".into()))?;
                row.signed = Some(value.as_bytes().to_vec());
            }
            _ if line.trim_start().starts_with('<') => {
                let row = fixture
                    .rows
                    .last_mut()
                    .ok_or_else(|| Error::Malformed("block before `message`".into()))?;
                let mut block = format!("{line}\n");
                if !line.contains(END_MARKER) {
                    for next in lines.by_ref() {
                        block.push_str(next);
                        block.push('\n');
                        if next.contains(END_MARKER) {
                            break;
                        }
                    }
                }
                let tokens = block_tokens(&block)?;
                let values = tokens
                    .iter()
                    .enumerate()
                    .map(|(position, t)| {
                        PrintedValue::parse(t).ok_or_else(|| Error::MalformedInteger {
                            position,
                            token: t.to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                row.cells = values.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            }
            _ => return Err(Error::Malformed(format!("unexpected fixture line {line:?}"))),
        }
    }
    if fixture.rows.is_empty() {
        return Err(Error::Malformed("fixture has no rows".into()));
    }
    if scheme == Scheme::Subliminal && fixture.cover.is_none() {
        return Err(Error::Malformed("subliminal fixture needs a `cover` line".into()));
    }
    Ok(fixture)
}

/// The two tables as shipped with the crate.
pub fn shipped_fixtures() -> Vec<TableFixture> {
    [
        include_str!("../../fixtures/table1.table"),
        include_str!("../../fixtures/table2.table"),
    ]
    .iter()
    .map(|text| parse_table_fixture(text).expect("shipped fixtures parse"))
    .collect()
}

/// Fitted parameters: `param` is `r` for the signature table and the pad
/// byte for the subliminal table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitResult {
    pub param: BigInt,
    pub k: BigInt,
    /// Sum of `|printed − fitted|` over every cell, exactly.
    pub residual: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableFit {
    /// One parameter set reproduces every row.
    Shared(FitResult),
    /// Rows needed their own parameters.
    PerRow(Vec<FitResult>),
}

impl TableFit {
    pub fn for_row(&self, row: usize) -> &FitResult {
        match self {
            TableFit::Shared(fit) => fit,
            TableFit::PerRow(fits) => &fits[row],
        }
    }
}

/// `(a, b)` per cell, given the scheme parameter (`r` or the pad byte).
fn cell_inputs(row: &TableRow, scheme: Scheme, cover: Option<&[u8]>, param: u32) -> Vec<(u32, u32)> {
    let text = row.signed_text();
    match scheme {
        Scheme::Signature => text.iter().map(|&m| (m as u32, param)).collect(),
        Scheme::Subliminal => {
            let cover = cover.unwrap_or_default();
            let len = text.len().max(cover.len());
            let at = |s: &[u8], i: usize| s.get(i).map_or(param, |&c| c as u32);
            (0..len).map(|i| (at(cover, i), at(text, i))).collect()
        }
    }
}

fn predicted_s1(a: u32, b: u32) -> Rational {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    (Rational::new(a, b.clone()) + Rational::from_integer(b)) / Rational::from_integer(BigInt::from(2))
}

fn predicted_s2(a: u32, b: u32, k: &BigInt) -> Rational {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    Rational::new(k.clone(), BigInt::from(2)) * (Rational::new(a, b.clone()) - Rational::from_integer(b))
}

fn check_shape(rows: &[TableRow], scheme: Scheme, cover: Option<&[u8]>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::NoFit("no rows".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        let expected = cell_inputs(row, scheme, cover, 1).len();
        if row.cells.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: row.cells.len(),
            });
        }
        if row.cells.is_empty() {
            return Err(Error::NoFit(format!("row {} has no cells", i + 1)));
        }
    }
    Ok(())
}

/// Smallest `(residual, candidate)` under a total order, so the outcome does
/// not depend on scan order.
fn argmin(candidates: impl Iterator<Item = u32>, residual: impl Fn(u32) -> f64) -> u32 {
    candidates
        .map(|c| (residual(c), c))
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        .map(|(_, c)| c)
        .expect("candidate range is non-empty")
}

fn fit_rows(rows: &[TableRow], scheme: Scheme, cover: Option<&[u8]>) -> FitResult {
    let printed: Vec<(f64, f64)> = rows
        .iter()
        .flat_map(|r| r.cells.iter())
        .map(|(s1, s2)| (s1.value.to_f64().unwrap(), s2.value.to_f64().unwrap()))
        .collect();
    let inputs_for = |param: u32| -> Vec<(f64, f64)> {
        rows.iter()
            .flat_map(|r| cell_inputs(r, scheme, cover, param))
            .map(|(a, b)| (a as f64, b as f64))
            .collect()
    };

    let param = match scheme {
        Scheme::Signature => argmin(2..=SEARCH_LIMIT, |r| {
            inputs_for(r)
                .iter()
                .zip(&printed)
                .map(|((a, b), (s1, _))| (s1 - (a / b + b) / 2.0).abs())
                .sum()
        }),
        Scheme::Subliminal => {
            let cover_len = cover.map_or(0, <[u8]>::len);
            let padded = rows.iter().any(|r| r.signed_text().len() != cover_len);
            if padded {
                argmin(1..=255, |pad| {
                    inputs_for(pad)
                        .iter()
                        .zip(&printed)
                        .map(|((a, b), (s1, _))| (s1 - (a / b + b) / 2.0).abs())
                        .sum()
                })
            } else {
                DEFAULT_PAD as u32
            }
        }
    };

    let inputs = inputs_for(param);
    let k = argmin(2..=SEARCH_LIMIT, |k| {
        inputs
            .iter()
            .zip(&printed)
            .map(|((a, b), (_, s2))| (s2 - k as f64 / 2.0 * (a / b - b)).abs())
            .sum()
    });

    let k = BigInt::from(k);
    let residual = rows
        .iter()
        .flat_map(|row| {
            let k = &k;
            cell_inputs(row, scheme, cover, param)
                .into_iter()
                .zip(&row.cells)
                .map(move |((a, b), (s1, s2))| {
                    (&s1.value - predicted_s1(a, b)).abs() + (&s2.value - predicted_s2(a, b, k)).abs()
                })
        })
        .fold(Rational::zero(), |acc, d| acc + d);
    FitResult {
        param: BigInt::from(param),
        k,
        residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    S1,
    S2,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Column::S1 => "S1",
            Column::S2 => "S2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    /// 1-based, as in the printed table.
    pub row: usize,
    /// 1-based pair index within the row.
    pub pair: usize,
    pub column: Column,
    pub printed: String,
    pub fitted: Rational,
    /// `fitted` rendered at the printed number of decimals.
    pub rendered: String,
    pub relative_error: Rational,
    pub pass: bool,
}

impl CellDiff {
    pub fn digits_match(&self) -> bool {
        self.rendered == self.printed
    }
}

fn diff_cells(
    rows: &[TableRow],
    scheme: Scheme,
    cover: Option<&[u8]>,
    fit: impl Fn(usize) -> FitResult,
) -> Vec<CellDiff> {
    let tolerance = relative_tolerance();
    let mut diffs = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        let params = fit(ri);
        let param = params.param.to_u32().expect("parameters fit in u32");
        for (pi, ((a, b), (s1, s2))) in cell_inputs(row, scheme, cover, param)
            .into_iter()
            .zip(&row.cells)
            .enumerate()
        {
            for (column, printed, fitted) in [
                (Column::S1, s1, predicted_s1(a, b)),
                (Column::S2, s2, predicted_s2(a, b, &params.k)),
            ] {
                let error = (&printed.value - &fitted).abs();
                let (relative_error, pass) = if fitted.is_zero() {
                    (error.clone(), error.is_zero())
                } else {
                    let rel = error / fitted.abs();
                    let pass = rel <= tolerance;
                    (rel, pass)
                };
                diffs.push(CellDiff {
                    row: ri + 1,
                    pair: pi + 1,
                    column,
                    printed: printed.text.clone(),
                    rendered: render_decimal(&fitted, decimal_places(&printed.text)),
                    fitted,
                    relative_error,
                    pass,
                });
            }
        }
    }
    diffs
}

fn describe_failures(diffs: &[CellDiff]) -> String {
    let failed: Vec<String> = diffs
        .iter()
        .filter(|d| !d.pass)
        .map(|d| format!("row {} pair {} {}", d.row, d.pair, d.column))
        .collect();
    failed.join(", ")
}

/// Fits one parameter set for the whole table; if that cannot reach the
/// tolerance, fits each row on its own.
pub fn fit_table_params(rows: &[TableRow], scheme: Scheme, cover: Option<&[u8]>) -> Result<TableFit> {
    check_shape(rows, scheme, cover)?;
    let shared = fit_rows(rows, scheme, cover);
    let diffs = diff_cells(rows, scheme, cover, |_| shared.clone());
    if diffs.iter().all(|d| d.pass) {
        return Ok(TableFit::Shared(shared));
    }
    let per_row: Vec<FitResult> = rows
        .iter()
        .map(|row| fit_rows(std::slice::from_ref(row), scheme, cover))
        .collect();
    let diffs = diff_cells(rows, scheme, cover, |i| per_row[i].clone());
    if diffs.iter().all(|d| d.pass) {
        return Ok(TableFit::PerRow(per_row));
    }
    Err(Error::NoFit(format!(
        "cells out of tolerance: {}",
        describe_failures(&diffs)
    )))
}

/// The message byte behind each signature-table cell, `M = r(2·S1 − r)`,
/// rounded to the nearest integer.
pub fn recover_signed_bytes(row: &TableRow, r: &BigInt) -> Vec<Option<u8>> {
    let r = Rational::from_integer(r.clone());
    let two = Rational::from_integer(BigInt::from(2));
    row.cells
        .iter()
        .map(|(s1, _)| {
            let m = &r * (&two * &s1.value - &r);
            m.round().to_integer().to_u8()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableReport {
    pub title: String,
    pub scheme: Scheme,
    pub fit: Result<TableFit>,
    pub cells: Vec<CellDiff>,
    pub notes: Vec<String>,
    /// Problems found beyond individual cells.
    pub failures: Vec<String>,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.fit.is_ok() && self.failures.is_empty() && self.cells.iter().all(|c| c.pass)
    }
}

pub fn reproduce_table(fixture: &TableFixture) -> TableReport {
    let cover = fixture.cover.as_deref();
    let fit = fit_table_params(&fixture.rows, fixture.scheme, cover);
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    let cells = match &fit {
        Ok(fit) => diff_cells(&fixture.rows, fixture.scheme, cover, |i| fit.for_row(i).clone()),
        // still show which cells the best shared parameters miss
        Err(Error::NoFit(_)) => {
            let best = fit_rows(&fixture.rows, fixture.scheme, cover);
            diff_cells(&fixture.rows, fixture.scheme, cover, |_| best.clone())
        }
        Err(_) => Vec::new(),
    };

    if let (Ok(fit), Scheme::Signature) = (&fit, fixture.scheme) {
        for (ri, row) in fixture.rows.iter().enumerate() {
            let recovered = recover_signed_bytes(row, &fit.for_row(ri).param);
            for (pi, (&got, &want)) in recovered.iter().zip(row.signed_text()).enumerate() {
                if got != Some(want) {
                    failures.push(format!(
                        "row {} pair {}: S1 encodes {:?}, fixture says {:?}",
                        ri + 1,
                        pi + 1,
                        got.map(char::from),
                        char::from(want)
                    ));
                }
            }
        }
    }
    for (ri, row) in fixture.rows.iter().enumerate() {
        if row.signed.is_some() {
            for (pi, (&printed, &signed)) in row.message.iter().zip(row.signed_text()).enumerate() {
                if printed != signed {
                    notes.push(format!(
                        "row {} position {}: printed message has {:?}, the pairs sign {:?}",
                        ri + 1,
                        pi + 1,
                        char::from(printed),
                        char::from(signed)
                    ));
                }
            }
        }
    }

    TableReport {
        title: fixture.title.clone(),
        scheme: fixture.scheme,
        fit,
        cells,
        notes,
        failures,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TablesReport {
    pub tables: Vec<TableReport>,
}

impl TablesReport {
    pub fn passed(&self) -> bool {
        !self.tables.is_empty() && self.tables.iter().all(TableReport::passed)
    }
}

pub fn reproduce_tables(fixtures: &[TableFixture]) -> TablesReport {
    TablesReport {
        tables: fixtures.iter().map(reproduce_table).collect(),
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({})", self.title, self.scheme)?;
        let param_name = match self.scheme {
            Scheme::Signature => "r",
            Scheme::Subliminal => "pad",
        };
        match &self.fit {
            Ok(TableFit::Shared(fit)) => {
                writeln!(
                    f,
                    "  fit: {param_name} = {}, k = {} (shared by every row)",
                    fit.param, fit.k
                )?;
                writeln!(f, "  residual: {:.3e}", fit.residual.to_f64().unwrap_or(f64::NAN))?;
            }
            Ok(TableFit::PerRow(fits)) => {
                for (i, fit) in fits.iter().enumerate() {
                    writeln!(f, "  fit row {}: {param_name} = {}, k = {}", i + 1, fit.param, fit.k)?;
                }
            }
            Err(e) => writeln!(f, "  fit: {e}")?,
        }
        for d in &self.cells {
            writeln!(
                f,
                "  row {:>2} pair {:>2} {}: printed {:>18} fitted {:>18} rel.err {:.2e} {}",
                d.row,
                d.pair,
                d.column,
                d.printed,
                d.rendered,
                d.relative_error.to_f64().unwrap_or(f64::NAN),
                if d.pass { "ok" } else { "FAIL" }
            )?;
        }
        let exact = self.cells.iter().filter(|d| d.digits_match()).count();
        writeln!(
            f,
            "  cells: {} within tolerance of {}; {} agree digit-for-digit",
            self.cells.iter().filter(|d| d.pass).count(),
            self.cells.len(),
            exact
        )?;
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        for failure in &self.failures {
            writeln!(f, "  FAIL: {failure}")?;
        }
        writeln!(f, "  result: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

impl fmt::Display for TablesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for table in &self.tables {
            write!(f, "{table}")?;
        }
        writeln!(f, "overall: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}
