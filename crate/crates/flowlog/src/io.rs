//! Delimited fact files and the string dictionary.
//!
//! A relation `r` is read from and written to `r.facts`: one row per line,
//! fields split on a configurable delimiter (tab by default). A field that
//! parses as an `i64` is that number; any other token is interned and the
//! row stores its dictionary id. Ids live at the very bottom of the `i64`
//! range, so programs can still compare and order numeric fields freely;
//! writing decodes ids back to their tokens.
//!
//! A zero-arity relation is one fact or none: its file holds a single
//! empty line when the fact is present and is empty otherwise.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::Database;
use crate::frontend::Program;

/// Interns non-numeric tokens, handing out ids from `i64::MIN` upward.
/// Numeric fields at the bottom of the range would collide with ids, so
/// that sliver of the domain is reserved for interned tokens.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    names: Vec<String>,
    ids: HashMap<String, i64>,
}

impl Dictionary {
    pub fn new() -> Dictionary {
        Dictionary::default()
    }

    /// The id for `token`, allocating one on first sight.
    pub fn intern(&mut self, token: &str) -> i64 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = i64::MIN + self.names.len() as i64;
        self.names.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    /// Numeric fields pass through; anything else is interned.
    pub fn encode(&mut self, token: &str) -> i64 {
        match token.parse::<i64>() {
            Ok(value) => value,
            Err(_) => self.intern(token),
        }
    }

    /// Render a value: its token if it is an interned id, else the number.
    pub fn decode(&self, value: i64) -> String {
        if let Some(offset) = value.checked_sub(i64::MIN) {
            if let Some(name) = self.names.get(offset as usize) {
                return name.clone();
            }
        }
        value.to_string()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug)]
pub enum IoError {
    /// A line that does not fit the relation's arity or holds an empty
    /// field.
    MalformedRow { path: PathBuf, line: usize, message: String },
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::MalformedRow { path, line, message } => {
                write!(f, "{}:{line}: {message}", path.display())
            }
            IoError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for IoError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IoError::MalformedRow { .. } => None,
            IoError::Io { source, .. } => Some(source),
        }
    }
}

fn facts_path(dir: &Path, relation: &str) -> PathBuf {
    dir.join(format!("{relation}.facts"))
}

/// Read one relation's facts. A missing file is an empty relation; the
/// directory itself must exist.
pub fn read_facts(
    dir: &Path,
    relation: &str,
    arity: usize,
    delimiter: char,
    dict: &mut Dictionary,
) -> Result<BTreeSet<Vec<i64>>, IoError> {
    let path = facts_path(dir, relation);
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeSet::new()),
        Err(source) => return Err(IoError::Io { path, source }),
    };

    let mut rows = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let malformed = |message: String| IoError::MalformedRow {
            path: path.clone(),
            line: i + 1,
            message,
        };
        if arity == 0 {
            if !line.is_empty() {
                return Err(malformed(format!(
                    "{relation} has no columns; expected an empty line"
                )));
            }
            rows.insert(Vec::new());
            continue;
        }
        let fields: Vec<&str> = line.split(delimiter).collect();
        if fields.len() != arity {
            return Err(malformed(format!(
                "expected {arity} fields for {relation}, found {}",
                fields.len()
            )));
        }
        if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
            return Err(malformed(format!("field {} is empty", pos + 1)));
        }
        rows.insert(fields.iter().map(|f| dict.encode(f)).collect());
    }
    Ok(rows)
}

/// Write one relation's facts, sorted, decoding interned ids.
pub fn write_facts(
    dir: &Path,
    relation: &str,
    rows: &BTreeSet<Vec<i64>>,
    delimiter: char,
    dict: &Dictionary,
) -> Result<(), IoError> {
    let path = facts_path(dir, relation);
    let io_err = |source| IoError::Io { path: path.clone(), source };
    std::fs::create_dir_all(dir).map_err(io_err)?;

    let mut out = String::new();
    for row in rows {
        let mut first = true;
        for &value in row {
            if !first {
                out.push(delimiter);
            }
            out.push_str(&dict.decode(value));
            first = false;
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(&path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Load every declared input relation from `dir`.
pub fn load_inputs(
    program: &Program,
    dir: &Path,
    delimiter: char,
    dict: &mut Dictionary,
) -> Result<Database, IoError> {
    if !dir.is_dir() {
        return Err(IoError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "facts directory not found",
            ),
        });
    }
    let mut database = Database::new();
    for name in &program.inputs {
        let arity = program.relation(name).arity;
        let rows = read_facts(dir, name, arity, delimiter, dict)?;
        database.insert(name.clone(), rows);
    }
    Ok(database)
}

/// Write every declared output relation into `dir`.
pub fn write_outputs(
    program: &Program,
    database: &Database,
    dir: &Path,
    delimiter: char,
    dict: &Dictionary,
) -> Result<(), IoError> {
    static EMPTY: BTreeSet<Vec<i64>> = BTreeSet::new();
    for name in &program.outputs {
        let rows = database.get(name).unwrap_or(&EMPTY);
        write_facts(dir, name, rows, delimiter, dict)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn write(dir: &Path, name: &str, content: &str) {
        std::fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn numeric_fields_pass_through_and_tokens_intern() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "edge.facts", "1\tparis\n-7\tparis\n2\tlyon\n");
        let mut dict = Dictionary::new();
        let rows = read_facts(dir.path(), "edge", 2, '\t', &mut dict).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(dict.len(), 2);
        let paris = *rows.iter().find(|r| r[0] == 1).map(|r| &r[1]).unwrap();
        assert_eq!(dict.decode(paris), "paris");
        assert_eq!(dict.decode(42), "42");
    }

    #[test]
    fn roundtrip_preserves_rows_and_tokens() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "r.facts", "10\tten\n20\ttwenty\n");
        let mut dict = Dictionary::new();
        let rows = read_facts(dir.path(), "r", 2, '\t', &mut dict).unwrap();
        let out = tempfile::tempdir().unwrap();
        write_facts(out.path(), "r", &rows, '\t', &dict).unwrap();
        let text = std::fs::read_to_string(out.path().join("r.facts")).unwrap();
        assert_eq!(text, "10\tten\n20\ttwenty\n");
    }

    #[test]
    fn zero_arity_files_hold_one_empty_line_or_nothing() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "yes.facts", "\n");
        write(dir.path(), "no.facts", "");
        let mut dict = Dictionary::new();
        let yes = read_facts(dir.path(), "yes", 0, '\t', &mut dict).unwrap();
        let no = read_facts(dir.path(), "no", 0, '\t', &mut dict).unwrap();
        assert_eq!(yes, BTreeSet::from([vec![]]));
        assert!(no.is_empty());

        let out = tempfile::tempdir().unwrap();
        write_facts(out.path(), "yes", &yes, '\t', &dict).unwrap();
        write_facts(out.path(), "no", &no, '\t', &dict).unwrap();
        assert_eq!(std::fs::read_to_string(out.path().join("yes.facts")).unwrap(), "\n");
        assert_eq!(std::fs::read_to_string(out.path().join("no.facts")).unwrap(), "");
    }

    #[test]
    fn arity_mismatch_reports_the_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "edge.facts", "1\t2\n1\t2\t3\n");
        let mut dict = Dictionary::new();
        let err = read_facts(dir.path(), "edge", 2, '\t', &mut dict).unwrap_err();
        match err {
            IoError::MalformedRow { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 2 fields"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_fields_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "edge.facts", "1\t\n");
        let mut dict = Dictionary::new();
        let err = read_facts(dir.path(), "edge", 2, '\t', &mut dict).unwrap_err();
        assert!(matches!(err, IoError::MalformedRow { line: 1, .. }));
    }

    #[test]
    fn missing_file_is_empty_but_missing_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut dict = Dictionary::new();
        let rows = read_facts(dir.path(), "ghost", 2, '\t', &mut dict).unwrap();
        assert!(rows.is_empty());

        let program = parse_program(
            ".decl edge(a: number, b: number)\n\
            .decl copy(a: number, b: number)\n\
            .input edge\n\
            .output copy\n\
            copy(x, y) :- edge(x, y).\n",
        )
        .unwrap();
        let missing = dir.path().join("nope");
        let err = load_inputs(&program, &missing, '\t', &mut dict).unwrap_err();
        assert!(matches!(err, IoError::Io { .. }));
    }

    #[test]
    fn alternate_delimiters_split_fields() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "edge.facts", "1,2\n3,4\n");
        let mut dict = Dictionary::new();
        let rows = read_facts(dir.path(), "edge", 2, ',', &mut dict).unwrap();
        assert_eq!(rows, BTreeSet::from([vec![1, 2], vec![3, 4]]));
    }

    #[test]
    fn program_level_io_covers_declared_inputs_and_outputs() {
        let src = "\
            .decl edge(a: number, b: number)\n\
            .decl reach(a: number)\n\
            .decl seed(a: number)\n\
            .input edge\n\
            .input seed\n\
            .output reach\n\
            reach(x) :- seed(x).\n\
            reach(y) :- reach(x), edge(x, y).\n";
        let program = parse_program(src).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "edge.facts", "1\t2\n2\t3\n");
        write(dir.path(), "seed.facts", "1\n");
        let mut dict = Dictionary::new();
        let db = load_inputs(&program, dir.path(), '\t', &mut dict).unwrap();
        assert_eq!(db["edge"].len(), 2);
        assert_eq!(db["seed"].len(), 1);

        let results: Database = [(
            "reach".to_string(),
            BTreeSet::from([vec![1], vec![2], vec![3]]),
        )]
        .into();
        let out = tempfile::tempdir().unwrap();
        write_outputs(&program, &results, out.path(), '\t', &dict).unwrap();
        assert_eq!(
            std::fs::read_to_string(out.path().join("reach.facts")).unwrap(),
            "1\n2\n3\n"
        );
    }
}
