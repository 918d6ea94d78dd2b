//! Run output: the echoed configuration and a report in text or
//! `key=value` form.

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned `key: value` lines for reading.
    Text,
    /// `key=value` lines for scripts.
    Kv,
}

/// Ordered `key = value` pairs.
#[derive(Clone, Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    /// Configuration lines: always `# key=value`, so data lines stay clean.
    pub fn render_config(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        let width = self
            .entries
            .iter()
            .map(|(k, _)| k.len() + 1)
            .max()
            .unwrap_or(0);
        for (k, v) in &self.entries {
            let _ = match format {
                Format::Kv => writeln!(out, "{k}={v}"),
                Format::Text => writeln!(out, "{:<width$}  {v}", format!("{k}:")),
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_forms() {
        let mut r = Report::new();
        r.put("n", 5).put("count", "185");
        assert_eq!(r.render(Format::Kv), "n=5\ncount=185\n");
        assert_eq!(r.render(Format::Text), "n:      5\ncount:  185\n");
        assert_eq!(r.render_config(), "# n=5\n# count=185\n");
    }
}
