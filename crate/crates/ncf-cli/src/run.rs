//! Command implementations. Every command prints a deterministic report and
//! maps its semantic outcome onto the exit status.

use std::fs;
use std::path::{Path, PathBuf};

use ncf::form::Form;
use ncf::formio::{self, Document};
use ncf::morphism::find_isomorphism;
use ncf::oracle::{self, SubcategoryId};
use ncf::properties::{form_property, preform_property, PropertyId};
use ncf::transport::{convert_form_to, ConversionError};
use ncf::tree::Tree;

use crate::report;
use crate::{Command, KindArg, STATUS_FALSE, STATUS_INVALID, STATUS_OK};

struct Io {
    quiet: bool,
}

impl Io {
    fn say(&self, text: &str) {
        if !self.quiet {
            println!("{text}");
        }
    }

    fn complain(&self, text: &str) {
        if !self.quiet {
            eprintln!("{text}");
        }
    }

    /// Reports go to the file when given, otherwise to standard output.
    fn deliver(&self, out: Option<&Path>, text: &str) -> Result<(), u8> {
        match out {
            Some(path) => self.write_file(path, text),
            None => {
                if !self.quiet {
                    print!("{text}");
                }
                Ok(())
            }
        }
    }

    fn write_file(&self, path: &Path, text: &str) -> Result<(), u8> {
        fs::write(path, text).map_err(|e| {
            self.complain(&format!("cannot write {}: {e}", path.display()));
            STATUS_INVALID
        })
    }
}

fn load(io: &Io, path: &Path) -> Result<Document, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        io.complain(&format!("cannot read {}: {e}", path.display()));
        STATUS_INVALID
    })?;
    formio::parse(&text).map_err(|e| {
        io.complain(&format!("{}: {e}", path.display()));
        STATUS_INVALID
    })
}

pub fn run(command: Command, quiet: bool) -> u8 {
    let io = Io { quiet };
    match dispatch(&io, command) {
        Ok(status) => status,
        Err(status) => status,
    }
}

fn dispatch(io: &Io, command: Command) -> Result<u8, u8> {
    match command {
        Command::Validate { file } => {
            let doc = load(io, &file)?;
            match &doc {
                Document::Form(f) => io.say(&format!(
                    "ok: form with {} nodes, {} choices, {} players",
                    f.nodes().len(),
                    f.choices().len(),
                    f.player_count()
                )),
                Document::Preform(p) => io.say(&format!(
                    "ok: preform with {} nodes, {} choices",
                    p.nodes().len(),
                    p.choices().len()
                )),
            }
            Ok(STATUS_OK)
        }
        Command::Derive { file, out } => {
            let doc = load(io, &file)?;
            io.deliver(out.as_deref(), &report::derive_report(&doc))?;
            Ok(STATUS_OK)
        }
        Command::Convert { file, to, out, witness } => {
            convert(io, &file, to, out.as_deref(), witness.as_deref())
        }
        Command::Check { file, property } => {
            let id: PropertyId = property.parse().map_err(|e: String| {
                io.complain(&e);
                STATUS_INVALID
            })?;
            let doc = load(io, &file)?;
            let check = match &doc {
                Document::Form(f) => form_property(f, id),
                Document::Preform(p) => preform_property(p, id),
            };
            match check.witness() {
                None => {
                    io.say(&format!("{id}: holds"));
                    Ok(STATUS_OK)
                }
                Some(w) => {
                    io.say(&format!("{id}: fails; {w}"));
                    Ok(STATUS_FALSE)
                }
            }
        }
        Command::Iso { file_a, file_b, witness } => iso(io, &file_a, &file_b, witness.as_deref()),
        Command::Enumerate { kind, nodes, players, count_only, out } => {
            enumerate(io, kind, nodes, players, count_only, out.as_deref())
        }
        Command::VerifyEnclosure { from, to, nodes, constructive, out } => {
            let from: SubcategoryId = from.parse().map_err(|e: String| {
                io.complain(&e);
                STATUS_INVALID
            })?;
            let to: SubcategoryId = to.parse().map_err(|e: String| {
                io.complain(&e);
                STATUS_INVALID
            })?;
            let result = oracle::verify_enclosure(from, to, nodes, constructive)
                .map_err(|e| {
                    io.complain(&e.to_string());
                    STATUS_INVALID
                })?;
            io.deliver(out.as_deref(), &report::enclosure_report(&result))?;
            Ok(if result.verified { STATUS_OK } else { STATUS_FALSE })
        }
    }
}

fn convert(
    io: &Io,
    file: &Path,
    to: crate::StyleArg,
    out: Option<&Path>,
    witness_out: Option<&Path>,
) -> Result<u8, u8> {
    let doc = load(io, file)?;
    let form = match &doc {
        Document::Form(f) => f.clone(),
        // A preform converts as its one-player form; the witness player
        // table is then the trivial one.
        Document::Preform(p) => Form::one_player(p),
    };
    match convert_form_to(to.target(), &form) {
        Ok((image, witness)) => {
            let image_doc = match &doc {
                Document::Form(_) => formio::serialize_form(&image),
                Document::Preform(_) => formio::serialize_preform(image.preform()),
            };
            io.deliver(out, &image_doc)?;
            if let Some(path) = witness_out {
                io.write_file(path, &report::form_witness_tables(witness.forward()))?;
            }
            Ok(STATUS_OK)
        }
        Err(ConversionError::AbsentmindedInput { first, second }) => {
            io.say(&format!(
                "absentminded input: nodes {first} and {second} share a choice range"
            ));
            Ok(STATUS_FALSE)
        }
        Err(e @ ConversionError::NotChoiceSequence(_)) => {
            io.complain(&e.to_string());
            Err(STATUS_INVALID)
        }
    }
}

fn iso(io: &Io, file_a: &Path, file_b: &Path, witness_out: Option<&Path>) -> Result<u8, u8> {
    let doc_a = load(io, file_a)?;
    let doc_b = load(io, file_b)?;
    let (form_a, form_b) = match (&doc_a, &doc_b) {
        (Document::Form(a), Document::Form(b)) => (a.clone(), b.clone()),
        (Document::Preform(a), Document::Preform(b)) => {
            (Form::one_player(a), Form::one_player(b))
        }
        _ => {
            io.say("not isomorphic: one document is a form, the other a preform");
            return Ok(STATUS_FALSE);
        }
    };
    match find_isomorphism(&form_a, &form_b) {
        Ok(witness) => {
            io.say("isomorphic");
            if let Some(path) = witness_out {
                io.write_file(path, &report::form_witness_tables(witness.forward()))?;
            }
            Ok(STATUS_OK)
        }
        Err(cert) => {
            io.say(&format!("not isomorphic: {cert}"));
            Ok(STATUS_FALSE)
        }
    }
}

fn tree_document(tree: &Tree) -> String {
    let mut out = format!("tree\nroot: {}\n", tree.root());
    for (child, parent) in tree.pred() {
        out.push_str(&format!("pred: {child} {parent}\n"));
    }
    out
}

fn enumerate(
    io: &Io,
    kind: KindArg,
    nodes: usize,
    players: Option<usize>,
    count_only: bool,
    out: Option<&Path>,
) -> Result<u8, u8> {
    let invalid = |e: oracle::OracleError| {
        io.complain(&e.to_string());
        STATUS_INVALID
    };
    let documents: Vec<(String, String)> = match kind {
        KindArg::Tree => oracle::enumerate_trees(nodes)
            .map_err(invalid)?
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("tree_{i:04}.txt"), tree_document(t)))
            .collect(),
        KindArg::Preform => oracle::enumerate_preforms(nodes)
            .map_err(invalid)?
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("preform_{i:04}.ncf"), formio::serialize_preform(p)))
            .collect(),
        KindArg::Form => oracle::enumerate_forms(nodes, players.unwrap_or(nodes))
            .map_err(invalid)?
            .iter()
            .enumerate()
            .map(|(i, f)| (format!("form_{i:04}.ncf"), formio::serialize_form(f)))
            .collect(),
    };
    if count_only {
        io.say(&documents.len().to_string());
        return Ok(STATUS_OK);
    }
    match out {
        None => {
            for (_, text) in &documents {
                if !io.quiet {
                    println!("{text}");
                }
            }
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| {
                io.complain(&format!("cannot create {}: {e}", dir.display()));
                STATUS_INVALID
            })?;
            for (name, text) in &documents {
                io.write_file(&dir.join(PathBuf::from(name)), text)?;
            }
            io.say(&format!("wrote {} objects to {}", documents.len(), dir.display()));
        }
    }
    Ok(STATUS_OK)
}
