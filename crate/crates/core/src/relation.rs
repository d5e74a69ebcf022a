//! Tabular data model: schema, tuples with stable ids, and delimited-text I/O.
//!
//! Every value is a string; a missing value is the empty string. Tuple ids are
//! assigned from load order starting at 1 and stay attached to a tuple for the
//! whole cleaning run, so repairs and duplicate removal can be traced back to
//! input rows.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable tuple identifier.
pub type Tid = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<Attribute>,
    by_name: HashMap<String, usize>,
}

impl Schema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut attributes = Vec::new();
        let mut by_name = HashMap::new();
        for (position, name) in names.into_iter().enumerate() {
            let name = name.into();
            if by_name.insert(name.clone(), position).is_some() {
                return Err(Error::DuplicateAttribute(name));
            }
            attributes.push(Attribute { name, position });
        }
        Ok(Schema {
            attributes,
            by_name,
        })
    }

    /// `A1..Ad`, used when a file carries no header row.
    pub fn positional(arity: usize) -> Self {
        Schema::new((1..=arity).map(|i| format!("A{i}"))).expect("positional names are unique")
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, position: usize) -> &str {
        &self.attributes[position].name
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuple {
    pub tid: Tid,
    pub values: Vec<String>,
}

impl Tuple {
    pub fn value(&self, position: usize) -> &str {
        &self.values[position]
    }
}

/// An ordered set of tuples over a fixed schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    schema: Schema,
    tuples: Vec<Tuple>,
}

impl Relation {
    /// Builds a relation from rows, numbering tuples from 1.
    pub fn from_rows<S: Into<String>>(
        schema: Schema,
        rows: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Self> {
        let tuples = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| Tuple {
                tid: i as Tid + 1,
                values: row.into_iter().map(Into::into).collect(),
            })
            .collect();
        Relation::from_tuples(schema, tuples)
    }

    /// Builds a relation from tuples that already carry ids.
    pub fn from_tuples(schema: Schema, tuples: Vec<Tuple>) -> Result<Self> {
        let arity = schema.arity();
        let mut prev: Option<Tid> = None;
        for t in &tuples {
            if t.values.len() != arity {
                return Err(Error::RaggedRow {
                    row: t.tid as usize,
                    expected: arity,
                    found: t.values.len(),
                });
            }
            if let Some(p) = prev {
                if t.tid <= p {
                    return Err(Error::TidOrder {
                        prev: p,
                        tid: t.tid,
                    });
                }
            }
            prev = Some(t.tid);
        }
        Ok(Relation { schema, tuples })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, tid: Tid) -> Option<&Tuple> {
        self.tuples
            .binary_search_by_key(&tid, |t| t.tid)
            .ok()
            .map(|i| &self.tuples[i])
    }

    pub fn tids(&self) -> impl Iterator<Item = Tid> + '_ {
        self.tuples.iter().map(|t| t.tid)
    }

    /// Row-major value matrix, ignoring tuple ids.
    pub fn values(&self) -> Vec<Vec<String>> {
        self.tuples.iter().map(|t| t.values.clone()).collect()
    }

    /// The tuples with the given ids, in id order. Unknown ids are ignored.
    pub fn subset(&self, tids: &[Tid]) -> Relation {
        let mut sorted = tids.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let tuples = sorted
            .into_iter()
            .filter_map(|tid| self.tuple(tid).cloned())
            .collect();
        Relation {
            schema: self.schema.clone(),
            tuples,
        }
    }

    /// Same values, tuple ids replaced in order by `tids`.
    pub fn with_tids(&self, tids: &[Tid]) -> Result<Relation> {
        if tids.len() != self.tuples.len() {
            return Err(Error::Inconsistent(format!(
                "{} ids for {} tuples",
                tids.len(),
                self.tuples.len()
            )));
        }
        let tuples = self
            .tuples
            .iter()
            .zip(tids)
            .map(|(t, &tid)| Tuple {
                tid,
                values: t.values.clone(),
            })
            .collect();
        Relation::from_tuples(self.schema.clone(), tuples)
    }

    pub fn into_parts(self) -> (Schema, Vec<Tuple>) {
        (self.schema, self.tuples)
    }

    pub fn from_reader<R: Read>(reader: R, delimiter: u8, has_header: bool) -> Result<Self> {
        read_delimited(reader, delimiter, has_header).map_err(|e| match e {
            ReadError::Csv(source) => Error::Csv {
                path: "<reader>".into(),
                source,
            },
            ReadError::Other(e) => e,
        })
    }

    pub fn to_writer<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        write_delimited(self, writer, delimiter).map_err(|source| Error::Csv {
            path: "<writer>".into(),
            source,
        })
    }

    pub fn to_csv_string(&self, delimiter: u8) -> String {
        let mut buf = Vec::new();
        self.to_writer(&mut buf, delimiter)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Loads a delimited text file. Tuple ids follow row order starting at 1.
pub fn load_relation(path: impl AsRef<Path>, delimiter: u8, has_header: bool) -> Result<Relation> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_delimited(file, delimiter, has_header).map_err(|e| match e {
        ReadError::Csv(source) => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        ReadError::Other(e) => e,
    })
}

/// Writes a header row followed by one line per tuple, quoting values that
/// contain the delimiter, quotes or line breaks.
pub fn write_relation(rel: &Relation, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_delimited(rel, file, delimiter).map_err(|source| match source.kind() {
        csv::ErrorKind::Io(_) => match source.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
    })
}

enum ReadError {
    Csv(csv::Error),
    Other(Error),
}

impl From<csv::Error> for ReadError {
    fn from(e: csv::Error) -> Self {
        ReadError::Csv(e)
    }
}

fn read_delimited<R: Read>(
    reader: R,
    delimiter: u8,
    has_header: bool,
) -> std::result::Result<Relation, ReadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut schema = None;
    if has_header {
        match records.next() {
            Some(header) => {
                let header = header?;
                schema = Some(Schema::new(header.iter()).map_err(ReadError::Other)?);
            }
            None => {
                return Ok(Relation {
                    schema: Schema::positional(0),
                    tuples: Vec::new(),
                })
            }
        }
    }

    let mut tuples = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        let row = i + 1;
        let schema = schema.get_or_insert_with(|| Schema::positional(record.len()));
        if record.len() != schema.arity() {
            return Err(ReadError::Other(Error::RaggedRow {
                row,
                expected: schema.arity(),
                found: record.len(),
            }));
        }
        tuples.push(Tuple {
            tid: row as Tid,
            values: record.iter().map(str::to_owned).collect(),
        });
    }

    Ok(Relation {
        schema: schema.unwrap_or_else(|| Schema::positional(0)),
        tuples,
    })
}

fn write_delimited<W: Write>(rel: &Relation, writer: W, delimiter: u8) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(writer);
    if rel.schema.arity() > 0 {
        wtr.write_record(rel.schema.names())?;
        for t in &rel.tuples {
            wtr.write_record(&t.values)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
