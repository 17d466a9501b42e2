//! A small CIF reader covering the cell parameters and the `atom_site` loop.
//!
//! Only the first data block is read. Symmetry loops, occupancies and every
//! other tag are skipped, so the file must list the full motif.

use qcph_core::structure::StructureError;
use qcph_core::{Atom, CellParams, CrystalStructure};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CifError {
    #[error("missing cell parameter {0}")]
    MissingCellParameter(String),
    #[error("cell parameter {tag} has non-numeric value {value:?}")]
    NonNumericCellParameter { tag: String, value: String },
    #[error("malformed loop starting at line {line}")]
    MalformedLoop { line: usize },
    #[error("tag {tag} on line {line} has no value")]
    MissingValue { tag: String, line: usize },
    #[error("unterminated {what} starting at line {line}")]
    Unterminated { what: &'static str, line: usize },
    #[error("no atom_site loop with fractional coordinates")]
    MissingAtomSites,
    #[error("line {line}: coordinate {value:?} is not numeric")]
    NonNumericCoordinate { line: usize, value: String },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    text: String,
    line: usize,
    /// Quoted strings and text fields are never tags or keywords.
    quoted: bool,
}

impl Token {
    fn is_tag(&self) -> bool {
        !self.quoted && self.text.starts_with('_')
    }

    fn keyword(&self) -> Option<&str> {
        if self.quoted {
            return None;
        }
        let lower = self.text.to_ascii_lowercase();
        ["loop_", "data_", "global_", "save_", "stop_"]
            .into_iter()
            .find(|k| lower.starts_with(k))
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, CifError> {
    let mut tokens = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((line, raw)) = lines.next() {
        if let Some(first) = raw.strip_prefix(';') {
            let mut body = String::from(first);
            let mut closed = false;
            for (_, next) in lines.by_ref() {
                if next.starts_with(';') {
                    closed = true;
                    break;
                }
                body.push('\n');
                body.push_str(next);
            }
            if !closed {
                return Err(CifError::Unterminated { what: "text field", line });
            }
            tokens.push(Token { text: body, line, quoted: true });
            continue;
        }
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if c == '\'' || c == '"' {
                // a quote closes only when followed by whitespace or end of line
                let mut j = i + 1;
                loop {
                    if j >= chars.len() {
                        return Err(CifError::Unterminated { what: "quoted string", line });
                    }
                    if chars[j] == c && chars.get(j + 1).is_none_or(|n| n.is_whitespace()) {
                        break;
                    }
                    j += 1;
                }
                tokens.push(Token { text: chars[i + 1..j].iter().collect(), line, quoted: true });
                i = j + 1;
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() {
                    i += 1;
                }
                tokens.push(Token { text: chars[start..i].iter().collect(), line, quoted: false });
            }
        }
    }
    Ok(tokens)
}

#[derive(Debug, Default)]
struct Block {
    name: Option<String>,
    items: Vec<(String, Token)>,
    loops: Vec<Loop>,
}

#[derive(Debug)]
struct Loop {
    tags: Vec<String>,
    rows: Vec<Vec<Token>>,
}

impl Loop {
    fn column(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }
}

fn first_block(tokens: &[Token]) -> Result<Block, CifError> {
    let mut block = Block::default();
    let mut i = 0;
    let mut seen_data = false;
    while i < tokens.len() {
        let tok = &tokens[i];
        match tok.keyword() {
            Some("data_") => {
                if seen_data {
                    break;
                }
                seen_data = true;
                block.name = Some(tok.text[5..].to_string());
                i += 1;
            }
            Some("loop_") => {
                let line = tok.line;
                i += 1;
                let mut tags = Vec::new();
                while i < tokens.len() && tokens[i].is_tag() {
                    tags.push(tokens[i].text.to_ascii_lowercase());
                    i += 1;
                }
                let mut values = Vec::new();
                while i < tokens.len() && !tokens[i].is_tag() && tokens[i].keyword().is_none() {
                    values.push(tokens[i].clone());
                    i += 1;
                }
                if tags.is_empty() || values.len() % tags.len() != 0 {
                    return Err(CifError::MalformedLoop { line });
                }
                let rows = values.chunks(tags.len()).map(<[Token]>::to_vec).collect();
                block.loops.push(Loop { tags, rows });
            }
            Some(_) => i += 1,
            None if tok.is_tag() => {
                let value = tokens
                    .get(i + 1)
                    .filter(|v| !v.is_tag() && v.keyword().is_none())
                    .ok_or_else(|| CifError::MissingValue { tag: tok.text.clone(), line: tok.line })?;
                block.items.push((tok.text.to_ascii_lowercase(), value.clone()));
                i += 2;
            }
            None => i += 1,
        }
    }
    Ok(block)
}

/// Parses a CIF number, dropping a trailing standard uncertainty such as
/// `5.4321(12)`.
pub fn parse_number(text: &str) -> Option<f64> {
    let core = match text.find('(') {
        Some(p) if text.ends_with(')') => &text[..p],
        Some(_) => return None,
        None => text,
    };
    core.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Leading alphabetic run of a type symbol or label: `Pb2+` → `Pb`.
fn element_symbol(token: &str) -> String {
    token.chars().take_while(|c| c.is_ascii_alphabetic()).collect()
}

const CELL_TAGS: [&str; 6] = [
    "_cell_length_a",
    "_cell_length_b",
    "_cell_length_c",
    "_cell_angle_alpha",
    "_cell_angle_beta",
    "_cell_angle_gamma",
];

pub fn parse_cif(text: &str) -> Result<CrystalStructure, CifError> {
    let block = first_block(&tokenize(text)?)?;

    let mut cell = [0.0; 6];
    for (slot, tag) in cell.iter_mut().zip(CELL_TAGS) {
        let (_, tok) = block
            .items
            .iter()
            .find(|(t, _)| t == tag)
            .ok_or_else(|| CifError::MissingCellParameter(tag.to_string()))?;
        *slot = parse_number(&tok.text).ok_or_else(|| CifError::NonNumericCellParameter {
            tag: tag.to_string(),
            value: tok.text.clone(),
        })?;
    }

    let sites = block
        .loops
        .iter()
        .find(|l| l.column("_atom_site_fract_x").is_some())
        .ok_or(CifError::MissingAtomSites)?;
    let (Some(cx), Some(cy), Some(cz)) = (
        sites.column("_atom_site_fract_x"),
        sites.column("_atom_site_fract_y"),
        sites.column("_atom_site_fract_z"),
    ) else {
        return Err(CifError::MissingAtomSites);
    };
    let symbol_col = sites
        .column("_atom_site_type_symbol")
        .or_else(|| sites.column("_atom_site_label"))
        .ok_or(CifError::MissingAtomSites)?;

    let mut atoms = Vec::with_capacity(sites.rows.len());
    for row in &sites.rows {
        let mut frac = [0.0; 3];
        for (slot, col) in frac.iter_mut().zip([cx, cy, cz]) {
            let tok = &row[col];
            *slot = parse_number(&tok.text).ok_or_else(|| CifError::NonNumericCoordinate {
                line: tok.line,
                value: tok.text.clone(),
            })?;
        }
        atoms.push(Atom::new(element_symbol(&row[symbol_col].text), frac));
    }

    let [a, b, c, alpha, beta, gamma] = cell;
    let name = block.name.unwrap_or_default();
    Ok(CrystalStructure::new(name, CellParams::new(a, b, c, alpha, beta, gamma), atoms)?)
}
