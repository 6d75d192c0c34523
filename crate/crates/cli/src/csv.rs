//! CSV rendering with round-trip float formatting and whole-file atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits; non-finite values print as `NaN`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), num)
}

pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.header.len(), "row width");
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(opt(None), "NaN");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(&["1".into(), "2".into()]);
        assert_eq!(t.render(), "a,b\n1,2\n");
    }
}
