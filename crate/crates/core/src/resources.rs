//! The data files a session runs on, loaded and cross-checked together.

use std::fs;
use std::path::{Path, PathBuf};

use crate::display::{DisplayCatalog, DisplayError};
use crate::face::{FaceMesh, MeshError, VisemeTable};
use crate::kb::{KbError, KnowledgeBase};
use crate::nlp::{Grammar, Lexicon, NlpError, Parser, PreferenceConstraints};
use crate::respond::{PhonemeTable, TemplateError, Templates};

pub const GRAMMAR: &str = include_str!("../data/grammar.txt");
pub const LEXICON: &str = include_str!("../data/lexicon.txt");
pub const CONSTRAINTS: &str = include_str!("../data/constraints.txt");
pub const KB: &str = include_str!("../data/kb.json");
pub const TEMPLATES: &str = include_str!("../data/templates.json");
pub const DISPLAYS: &str = include_str!("../data/displays.json");
pub const MESH: &str = include_str!("../data/face_mesh.json");
pub const PHONEMES: &str = include_str!("../data/phonemes.txt");
pub const VISEMES: &str = include_str!("../data/visemes.txt");

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("reading {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Nlp(#[from] NlpError),
    #[error(transparent)]
    Templates(#[from] TemplateError),
    #[error(transparent)]
    Displays(#[from] DisplayError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{0}")]
    Table(String),
}

/// Text of each data file. Unset paths fall back to the shipped copy.
#[derive(Debug, Clone, Default)]
pub struct ResourcePaths {
    pub grammar: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub displays: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub constraints: PreferenceConstraints,
    pub kb: KnowledgeBase,
    pub templates: Templates,
    pub displays: DisplayCatalog,
    pub mesh: FaceMesh,
    pub phonemes: PhonemeTable,
    pub visemes: VisemeTable,
}

impl Resources {
    /// The shipped data. Panics only if the shipped files are broken, which
    /// the test suite rules out.
    pub fn builtin() -> Self {
        Self::from_texts(
            GRAMMAR,
            LEXICON,
            CONSTRAINTS,
            KB,
            TEMPLATES,
            DISPLAYS,
            MESH,
        )
        .expect("shipped resources are valid")
    }

    pub fn load(paths: &ResourcePaths) -> Result<Self, ResourceError> {
        fn read(path: &Option<PathBuf>, fallback: &str) -> Result<String, ResourceError> {
            match path {
                Some(p) => fs::read_to_string(p).map_err(|e| ResourceError::Io(p.clone(), e)),
                None => Ok(fallback.to_string()),
            }
        }
        Self::from_texts(
            &read(&paths.grammar, GRAMMAR)?,
            &read(&paths.lexicon, LEXICON)?,
            &read(&paths.constraints, CONSTRAINTS)?,
            &read(&paths.kb, KB)?,
            &read(&paths.templates, TEMPLATES)?,
            &read(&paths.displays, DISPLAYS)?,
            &read(&paths.mesh, MESH)?,
        )
    }

    pub fn from_texts(
        grammar: &str,
        lexicon: &str,
        constraints: &str,
        kb: &str,
        templates: &str,
        displays: &str,
        mesh: &str,
    ) -> Result<Self, ResourceError> {
        let kb = KnowledgeBase::from_json(kb)?;
        let grammar = Grammar::parse(grammar)?;
        grammar.check_against(&kb)?;
        let lexicon = Lexicon::parse(lexicon)?;
        lexicon.check_against(&kb)?;
        Ok(Resources {
            grammar,
            lexicon,
            constraints: PreferenceConstraints::parse(constraints)?,
            kb,
            templates: Templates::from_json(templates)?,
            displays: DisplayCatalog::from_json(displays)?,
            mesh: FaceMesh::from_json(mesh)?,
            phonemes: PhonemeTable::parse(PHONEMES).map_err(ResourceError::Table)?,
            visemes: VisemeTable::parse(VISEMES).map_err(ResourceError::Table)?,
        })
    }

    pub fn parser(&self) -> Parser<'_> {
        Parser::new(&self.grammar, &self.lexicon, &self.kb)
    }
}

/// Path of a shipped data file inside the source tree.
pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}
