use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use super::{ExportDocument, SessionError};

/// One JSON file per session in a directory. Writes go to a temporary file
/// in the same directory that is then renamed over the target.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, SessionError> {
        if !valid_session_id(id) {
            return Err(SessionError::InvalidId(id.to_owned()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn save(&self, doc: &ExportDocument) -> Result<(), SessionError> {
        let path = self.path(&doc.session_id)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&doc.to_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| SessionError::Io(e.error))?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<ExportDocument, SessionError> {
        match fs::read(self.path(id)?) {
            Ok(bytes) => ExportDocument::from_bytes(&bytes),
            Err(e) if e.kind() == ErrorKind::NotFound => Err(SessionError::NotFound(id.to_owned())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn exists(&self, id: &str) -> bool {
        self.path(id).map(|p| p.is_file()).unwrap_or(false)
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, SessionError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)?
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let id = name.strip_suffix(".json")?;
                valid_session_id(id).then(|| id.to_owned())
            })
            .collect();
        ids.sort();
        Ok(ids)
    }
}
