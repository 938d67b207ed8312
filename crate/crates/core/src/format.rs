//! Line-oriented group files.
//!
//! ```text
//! generators: a b
//! relator: a b a' b'        # ' marks an inverse
//! backend: extension        # free | free_abelian | finite | extension
//! kernel: free_abelian      # backend of K when backend is extension
//! image c: 1 1              # free_abelian vector of a generator
//! perm a: 1 2 0             # finite: permutation of 0..d
//! lift t: a -> a b ; b -> b
//! lift t inverse: a -> a b' ; b -> b
//! ```
//!
//! With `backend: extension` the generators and relators describe K and every
//! lift adds one stable letter. Generators without an `image` line get the
//! standard basis vectors, in order; maps left out of a lift fix the letter.

use std::collections::BTreeMap;
use std::path::Path;

use crate::backend::{FiniteGroup, FreeAbelian, GroupBackend};
use crate::error::{Error, Result};
use crate::extension::FreeExtension;
use crate::presentation::{parse_word, AutLift, HomPresentation, Presentation};
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Free,
    FreeAbelian,
    Finite,
    Extension,
}

impl BackendKind {
    fn parse(s: &str) -> Option<BackendKind> {
        match s {
            "free" => Some(BackendKind::Free),
            "free_abelian" => Some(BackendKind::FreeAbelian),
            "finite" | "direct_table" => Some(BackendKind::Finite),
            "extension" => Some(BackendKind::Extension),
            _ => None,
        }
    }
}

/// A parsed group file.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub presentation: HomPresentation,
    pub backend: GroupBackend,
    /// Present exactly when the file declares an extension.
    pub extension: Option<FreeExtension>,
}

impl GroupSpec {
    pub fn is_extension(&self) -> bool {
        self.extension.is_some()
    }
}

struct LiftLines {
    name: String,
    line: usize,
    forward: Option<Vec<(usize, Word)>>,
    backward: Option<Vec<(usize, Word)>>,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Column (1-based) of `part` inside `line`, both slices of one string.
fn col_of(line: &str, part: &str) -> usize {
    let offset = part.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

fn parse_map(text: &str, raw: &str, names: &[String], line: usize) -> Result<Vec<(usize, Word)>> {
    let mut out: Vec<(usize, Word)> = Vec::new();
    for clause in text.split(';') {
        if clause.trim().is_empty() {
            continue;
        }
        let col = col_of(raw, clause.trim_start());
        let (lhs, rhs) = clause.split_once("->").ok_or_else(|| perr(line, col, "expected `generator -> word`"))?;
        let g = names
            .iter()
            .position(|n| n == lhs.trim())
            .ok_or_else(|| perr(line, col, format!("unknown generator {:?}", lhs.trim())))?;
        if out.iter().any(|(h, _)| *h == g) {
            return Err(perr(line, col, format!("generator {} mapped twice", names[g])));
        }
        out.push((g, parse_word(rhs, names, line, col_of(raw, rhs))?));
    }
    Ok(out)
}

fn fill_map(map: &[(usize, Word)], rank: usize) -> Vec<Word> {
    (0..rank)
        .map(|g| map.iter().find(|(h, _)| *h == g).map_or_else(|| Word::new(vec![Letter::pos(g)]), |(_, w)| w.clone()))
        .collect()
}

fn parse_ints<T: std::str::FromStr>(text: &str, raw: &str, line: usize) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| tok.parse().map_err(|_| perr(line, col_of(raw, tok), format!("not an integer: {tok:?}"))))
        .collect()
}

pub fn parse_group(text: &str) -> Result<GroupSpec> {
    let mut names: Option<Vec<String>> = None;
    let mut relators = Vec::new();
    let mut backend: Option<(BackendKind, usize)> = None;
    let mut kernel: Option<BackendKind> = None;
    let mut images: BTreeMap<usize, (Vec<i64>, usize)> = BTreeMap::new();
    let mut perms: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut lifts: Vec<LiftLines> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let key_col = col_of(raw, body.trim_start());
        let (key, value) = body.split_once(':').ok_or_else(|| perr(line, key_col, "expected `key: value`"))?;
        let vcol = col_of(raw, value);
        let mut words = key.split_whitespace();
        let head = words.next().unwrap_or("");
        let args: Vec<&str> = words.collect();
        let need_names = || names.clone().ok_or_else(|| perr(line, key_col, "`generators:` must come first"));
        let generator_arg = |names: &[String]| -> Result<usize> {
            match args.as_slice() {
                [g] => names.iter().position(|n| n == g).ok_or_else(|| perr(line, key_col, format!("unknown generator {g:?}"))),
                _ => Err(perr(line, key_col, format!("`{head}` takes one generator name"))),
            }
        };
        match head {
            "generators" if args.is_empty() => {
                if names.is_some() {
                    return Err(perr(line, key_col, "generators declared twice"));
                }
                names = Some(value.split_whitespace().map(str::to_string).collect());
            }
            "relator" if args.is_empty() => {
                let n = need_names()?;
                let w = parse_word(value, &n, line, vcol)?;
                if w.is_empty() {
                    return Err(perr(line, vcol, "empty relator"));
                }
                relators.push(w);
            }
            "backend" | "kernel" if args.is_empty() => {
                let v = value.trim();
                let kind = BackendKind::parse(v).ok_or_else(|| perr(line, vcol, format!("unknown backend {v:?}")))?;
                if head == "backend" {
                    backend = Some((kind, line));
                } else if kind == BackendKind::Extension {
                    return Err(perr(line, vcol, "the kernel cannot itself be an extension"));
                } else {
                    kernel = Some(kind);
                }
            }
            "image" => {
                let n = need_names()?;
                let g = generator_arg(&n)?;
                images.insert(g, (parse_ints(value, raw, line)?, line));
            }
            "perm" => {
                let n = need_names()?;
                let g = generator_arg(&n)?;
                perms.insert(g, parse_ints(value, raw, line)?);
            }
            "lift" => {
                let n = need_names()?;
                let (name, inverse) = match args.as_slice() {
                    [t] => (*t, false),
                    [t, "inverse"] => (*t, true),
                    _ => return Err(perr(line, key_col, "expected `lift NAME:` or `lift NAME inverse:`")),
                };
                let map = parse_map(value, raw, &n, line)?;
                let idx = match lifts.iter().position(|l| l.name == name) {
                    Some(k) => k,
                    None => {
                        lifts.push(LiftLines { name: name.to_string(), line, forward: None, backward: None });
                        lifts.len() - 1
                    }
                };
                let slot = if inverse { &mut lifts[idx].backward } else { &mut lifts[idx].forward };
                if slot.replace(map).is_some() {
                    return Err(perr(line, key_col, format!("lift {name} defined twice")));
                }
            }
            _ => return Err(perr(line, key_col, format!("unknown key {:?}", key.trim()))),
        }
    }

    let names = names.ok_or_else(|| perr(1, 1, "missing `generators:` line"))?;
    let (kind, kind_line) = backend.ok_or_else(|| perr(1, 1, "missing `backend:` line"))?;
    let rank = names.len();
    let base = Presentation::new(names.clone(), relators)?;
    let presentation = HomPresentation::new(base);

    let simple = |kind: BackendKind| -> Result<GroupBackend> {
        match kind {
            BackendKind::Free => Ok(GroupBackend::free(rank)),
            BackendKind::FreeAbelian => {
                let dim = rank - images.len();
                let mut basis = 0;
                let mut vecs = Vec::with_capacity(rank);
                for g in 0..rank {
                    match images.get(&g) {
                        Some((v, line)) => {
                            if v.len() != dim {
                                return Err(perr(*line, 1, format!("image needs {dim} entries")));
                            }
                            vecs.push(v.clone());
                        }
                        None => {
                            let mut e = vec![0; dim];
                            e[basis] = 1;
                            basis += 1;
                            vecs.push(e);
                        }
                    }
                }
                Ok(GroupBackend::FreeAbelian(FreeAbelian::with_images(vecs)?))
            }
            BackendKind::Finite => {
                let all: Vec<Vec<usize>> = (0..rank)
                    .map(|g| perms.get(&g).cloned().ok_or_else(|| perr(kind_line, 1, format!("no `perm {}:` line", names[g]))))
                    .collect::<Result<_>>()?;
                Ok(GroupBackend::DirectTable(FiniteGroup::from_permutations(&all)?))
            }
            BackendKind::Extension => unreachable!(),
        }
    };

    if kind != BackendKind::Extension {
        if let Some(l) = lifts.first() {
            return Err(perr(l.line, 1, "lifts need `backend: extension`"));
        }
        let backend = simple(kind)?;
        return Ok(GroupSpec { presentation, backend, extension: None });
    }

    let kernel_backend = simple(kernel.unwrap_or(BackendKind::FreeAbelian))?;
    let mut auts = Vec::with_capacity(lifts.len());
    for (i, l) in lifts.iter().enumerate() {
        let forward = l.forward.as_ref().ok_or_else(|| perr(l.line, 1, format!("lift {} has no forward map", l.name)))?;
        let forward = fill_map(forward, rank);
        let backward = match &l.backward {
            Some(b) => fill_map(b, rank),
            None if forward.iter().enumerate().all(|(g, w)| w.letters() == [Letter::pos(g)]) => forward.clone(),
            None => return Err(perr(l.line, 1, format!("lift {} needs an inverse map", l.name))),
        };
        if names.contains(&l.name) {
            return Err(perr(l.line, 1, format!("stable letter {} clashes with a generator", l.name)));
        }
        auts.push(AutLift::new(l.name.clone(), i, forward, backward)?);
    }
    let ext = FreeExtension::new(presentation, kernel_backend, auts)?;
    Ok(GroupSpec { presentation: ext.presentation().clone(), backend: ext.backend().clone(), extension: Some(ext) })
}

pub fn load_group(path: &Path) -> Result<GroupSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_group(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_file() {
        let g = parse_group("generators: a b\nrelator: a b a' b'   # commutator\nbackend: free_abelian\n").unwrap();
        assert_eq!(g.presentation.marked_count(), 1);
        assert!(!g.is_extension());
        assert!(g.backend.equal_in_group(&Word::from_raw(&[1, 2]).unwrap(), &Word::from_raw(&[2, 1]).unwrap()).unwrap());
    }

    #[test]
    fn images_and_defaults() {
        let g = parse_group("generators: a b c\nrelator: a b a' b'\nrelator: c' a b\nimage c: 1 1\nbackend: free_abelian\n")
            .unwrap();
        let lhs = Word::from_raw(&[3]).unwrap();
        assert!(g.backend.equal_in_group(&lhs, &Word::from_raw(&[1, 2]).unwrap()).unwrap());
    }

    #[test]
    fn extension_file() {
        let text = "generators: a b\nrelator: a b a' b'\nbackend: extension\nkernel: free_abelian\n\
                    lift t: a -> a b ; b -> b\nlift t inverse: a -> a b'\n";
        let g = parse_group(text).unwrap();
        assert!(g.is_extension());
        assert_eq!(g.presentation.generators(), ["a", "b", "t"]);
        assert_eq!(g.presentation.marked_count(), 3);
        // t⁻¹ a t = a b
        let lhs = Word::from_raw(&[-3, 1, 3]).unwrap();
        assert!(g.backend.equal_in_group(&lhs, &Word::from_raw(&[1, 2]).unwrap()).unwrap());
        let id = parse_group("generators: a b\nrelator: a b a' b'\nbackend: extension\nlift t: a -> a\n").unwrap();
        assert_eq!(id.presentation.rank(), 3);
    }

    #[test]
    fn finite_file() {
        let g = parse_group("generators: a\nrelator: a a a\nbackend: finite\nperm a: 1 2 0\n").unwrap();
        assert!(g.backend.equal_in_group(&Word::from_raw(&[1, 1]).unwrap(), &Word::from_raw(&[-1]).unwrap()).unwrap());
    }

    fn parse_err(text: &str) -> (usize, usize) {
        match parse_group(text) {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_err("generators: a b\nrelator: a x\nbackend: free\n"), (2, 12));
        assert_eq!(parse_err("generators: a b\n  colour: red\n"), (2, 3));
        assert_eq!(parse_err("generators: a b\nbackend: tree\n"), (2, 9));
        assert_eq!(parse_err("generators: a b\nrelator: a b a' b'\n").0, 1);
        assert_eq!(parse_err("relator: a\n"), (1, 1));
        assert_eq!(parse_err("generators: a b\nbackend: extension\nlift t: a -> a b\n"), (3, 1));
        assert_eq!(parse_err("generators: a b\nbackend: free\nlift t: q -> a\n"), (3, 9));
        assert!(matches!(
            parse_group("generators: a b\nrelator: a a'\nbackend: free\n"),
            Err(Error::InvalidPresentation(_))
        ));
    }
}
