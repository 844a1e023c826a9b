//! Command output as readable lines or as tab-separated `key=value` records.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: String,
    /// `None` for records that only appear in machine output.
    pub text: Option<String>,
    pub fields: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    /// Adds one record; `text` is the human line, `fields` its machine form.
    pub fn push(&mut self, kind: &str, text: impl Into<String>, fields: &[(&str, String)]) {
        self.records.push(Record {
            kind: kind.to_string(),
            text: Some(text.into()),
            fields: fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        });
    }

    pub fn push_machine(&mut self, kind: &str, fields: &[(&str, String)]) {
        self.records.push(Record {
            kind: kind.to_string(),
            text: None,
            fields: fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        });
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for r in &self.records {
            match format {
                Format::Text => match &r.text {
                    Some(t) => out.push_str(t),
                    None => continue,
                },
                Format::Machine => {
                    out.push_str(&r.kind);
                    for (k, v) in &r.fields {
                        out.push('\t');
                        out.push_str(k);
                        out.push('=');
                        out.push_str(&v.replace(['\t', '\n'], " "));
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_records_are_tab_separated() {
        let mut r = Report::default();
        r.push("share", "APS: 12, 4, 0", &[("kind", "APS".into()), ("agent", "1".into()), ("value", "12".into())]);
        r.push_machine("share", &[("kind", "APS".into()), ("agent", "2".into()), ("value", "4".into())]);
        assert_eq!(r.render(Format::Text), "APS: 12, 4, 0\n");
        assert_eq!(r.render(Format::Machine), "share\tkind=APS\tagent=1\tvalue=12\nshare\tkind=APS\tagent=2\tvalue=4\n");
    }
}
