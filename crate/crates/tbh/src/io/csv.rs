//! Comma-separated tables. Floats carry 17 significant digits so they read
//! back bit-exactly; missing values are empty fields.

/// `x` in scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.header.len(), "row width must match the header");
        self.rows.push(fields.to_vec());
    }

    pub fn into_bytes(self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for record in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(record).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }

    pub fn text(&self) -> String {
        String::from_utf8(self.clone().into_bytes()).expect("fields are UTF-8")
    }
}
