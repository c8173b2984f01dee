//! Group counts over merged CSVs, and static SVG bar charts.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::ReportError;

/// A percentage held as an integer number of tenths, so `52.2` is `522`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Tenths(pub u64);

impl Tenths {
    /// `100 * count / total`, rounded half-up to one decimal.
    pub fn of(count: u64, total: u64) -> Tenths {
        if total == 0 {
            return Tenths(0);
        }
        let num = 2000 * u128::from(count) + u128::from(total);
        Tenths((num / (2 * u128::from(total))) as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub keys: Vec<String>,
    pub count: u64,
    pub percent: Tenths,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryTable {
    pub group_keys: Vec<String>,
    /// Count descending, then keys ascending.
    pub rows: Vec<SummaryRow>,
    pub total: u64,
}

impl SummaryTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Table as CSV: group columns, then `count` and `percent`.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.group_keys.iter().map(String::as_str).chain(["count", "percent"]))?;
        for row in &self.rows {
            let count = row.count.to_string();
            let pct = row.percent.to_string();
            w.write_record(row.keys.iter().map(String::as_str).chain([count.as_str(), pct.as_str()]))?;
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output of utf-8 input"))
    }

    pub fn write_csv(&self, out: &Path) -> Result<(), ReportError> {
        fs::write(out, self.to_csv()?)?;
        Ok(())
    }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut widths: Vec<usize> = self.group_keys.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, k) in widths.iter_mut().zip(&row.keys) {
                *w = (*w).max(k.chars().count());
            }
        }
        let count_w = self.rows.iter().map(|r| r.count.to_string().len()).max().unwrap_or(0).max(5);
        for (k, w) in self.group_keys.iter().zip(&widths) {
            write!(f, "{k:<w$}  ")?;
        }
        writeln!(f, "{:>count_w$}  {:>7}", "count", "percent")?;
        for row in &self.rows {
            for (k, w) in row.keys.iter().zip(&widths) {
                write!(f, "{k:<w$}  ")?;
            }
            writeln!(f, "{:>count_w$}  {:>6}%", row.count, row.percent.to_string())?;
        }
        write!(f, "total {}", self.total)
    }
}

/// Groups the data rows of a merged analyzer CSV by `group_by`.
pub fn summarize(csv_path: &Path, group_by: &[String]) -> Result<SummaryTable, ReportError> {
    summarize_reader(fs::File::open(csv_path)?, group_by)
}

pub fn summarize_reader<R: Read>(input: R, group_by: &[String]) -> Result<SummaryTable, ReportError> {
    if group_by.is_empty() {
        return Err(ReportError::NoGroupColumns);
    }
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let idx = group_by
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| ReportError::UnknownColumn { column: c.clone(), available: header.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    let mut total = 0;
    for rec in reader.records() {
        let rec = rec?;
        let key = idx.iter().map(|&i| rec.get(i).unwrap_or_default().to_string()).collect();
        *counts.entry(key).or_default() += 1;
        total += 1;
    }
    let mut rows: Vec<SummaryRow> =
        counts.into_iter().map(|(keys, count)| SummaryRow { keys, count, percent: Tenths::of(count, total) }).collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.keys.cmp(&b.keys)));
    Ok(SummaryTable { group_keys: group_by.to_vec(), rows, total })
}

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"];
const BAR_W: usize = 48;
const BAR_GAP: usize = 8;
const GROUP_GAP: usize = 32;
const PLOT_H: f64 = 240.0;
const TOP: usize = 40;
const LEFT: usize = 40;

/// Renders the table as an SVG bar chart: one bar per row, or with two
/// group keys one cluster per first-key value with a legend for the
/// second key. Output bytes depend only on the table.
pub fn render_chart(table: &SummaryTable) -> Result<String, ReportError> {
    if table.is_empty() {
        return Err(ReportError::EmptyTable);
    }
    let nkeys = table.group_keys.len();
    if !(1..=2).contains(&nkeys) {
        return Err(ReportError::TooManyKeys(nkeys));
    }
    // Clusters in order of first appearance in the (sorted) table.
    let mut clusters: Vec<(String, Vec<&SummaryRow>)> = Vec::new();
    let mut series: Vec<String> = Vec::new();
    for row in &table.rows {
        let head = row.keys[0].clone();
        match clusters.iter_mut().find(|(k, _)| *k == head) {
            Some((_, rows)) => rows.push(row),
            None => clusters.push((head, vec![row])),
        }
        if nkeys == 2 && !series.contains(&row.keys[1]) {
            series.push(row.keys[1].clone());
        }
    }
    let colour: BTreeMap<&str, &str> =
        series.iter().enumerate().map(|(i, s)| (s.as_str(), PALETTE[i % PALETTE.len()])).collect();
    let max = table.rows.iter().map(|r| r.count).max().unwrap_or(1).max(1) as f64;

    let mut body = String::new();
    let mut x = LEFT;
    let baseline = TOP as f64 + PLOT_H;
    for (head, rows) in &clusters {
        let start = x;
        for row in rows {
            let h = (row.count as f64 / max * PLOT_H).round();
            let fill = if nkeys == 2 { colour[row.keys[1].as_str()] } else { PALETTE[0] };
            let title = escape(&row.keys.join(" / "));
            let _ = writeln!(
                body,
                r#"<rect class="bar" x="{x}" y="{y}" width="{BAR_W}" height="{h}" fill="{fill}"><title>{title}: {c} ({p}%)</title></rect>"#,
                y = baseline - h,
                c = row.count,
                p = row.percent,
            );
            let _ = writeln!(
                body,
                r#"<text class="value" x="{cx}" y="{ty}" text-anchor="middle">{c} ({p}%)</text>"#,
                cx = x + BAR_W / 2,
                ty = baseline - h - 4.0,
                c = row.count,
                p = row.percent,
            );
            x += BAR_W + BAR_GAP;
        }
        let width = x - BAR_GAP - start;
        let _ = writeln!(
            body,
            r#"<text class="group" x="{cx}" y="{ty}" text-anchor="middle">{label}</text>"#,
            cx = start + width / 2,
            ty = baseline + 16.0,
            label = escape(head),
        );
        x += GROUP_GAP - BAR_GAP;
    }
    let mut width = x - GROUP_GAP + LEFT;
    let mut legend = String::new();
    if nkeys == 2 {
        let lx = width + 16;
        for (i, s) in series.iter().enumerate() {
            let ly = TOP + i * 18;
            let _ = writeln!(
                legend,
                r#"<rect class="legend" x="{lx}" y="{ly}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                colour[s.as_str()],
                lx + 18,
                ly + 10,
                escape(s),
            );
        }
        let longest = series.iter().map(|s| s.chars().count()).max().unwrap_or(0);
        width = lx + 18 + longest * 7 + 16;
    }
    let height = TOP + PLOT_H as usize + 40;
    let title = escape(&format!("{} (n = {})", table.group_keys.join(" x "), table.total));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<text class="title" x="{LEFT}" y="20" font-size="14">{title}</text>"#);
    let _ =
        writeln!(svg, r##"<line x1="{LEFT}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="#333"/>"##, x - GROUP_GAP);
    svg.push_str(&body);
    svg.push_str(&legend);
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_chart(table: &SummaryTable, out: &Path) -> Result<(), ReportError> {
    fs::write(out, render_chart(table)?)?;
    Ok(())
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}
