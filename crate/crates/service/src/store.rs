use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use indexmap::IndexMap;
use ssakit::{Decomposition, Grouping};

/// Immutable view of a session. Updates swap in a new snapshot, so a reader
/// holding one never sees a half-applied grouping.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub decomposition: Arc<Decomposition>,
    pub grouping: Arc<Grouping>,
    /// Serialized response of the last grouping submission.
    pub grouping_response: Option<Bytes>,
}

/// Sessions in least-recently-used order (front is the eviction candidate).
#[derive(Debug)]
pub struct SessionStore {
    sessions: Mutex<IndexMap<String, Arc<Session>>>,
    capacity: usize,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        Self { sessions: Mutex::new(IndexMap::new()), capacity: capacity.max(1) }
    }

    pub fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        let mut map = self.sessions.lock().expect("session lock");
        while map.len() >= self.capacity {
            map.shift_remove_index(0);
        }
        map.insert(session.id.clone(), session.clone());
        session
    }

    /// Snapshot of the session, marking it as most recently used.
    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        let mut map = self.sessions.lock().expect("session lock");
        let index = map.get_index_of(id)?;
        let last = map.len() - 1;
        map.move_index(index, last);
        map.get_index(last).map(|(_, s)| s.clone())
    }

    /// Replaces the grouping of `id` if the session still holds the
    /// decomposition the update was computed from.
    pub fn set_grouping(&self, base: &Session, grouping: Arc<Grouping>, response: Bytes) -> Option<Arc<Session>> {
        let mut map = self.sessions.lock().expect("session lock");
        let current = map.get_mut(&base.id)?;
        if !Arc::ptr_eq(&current.decomposition, &base.decomposition) {
            return None;
        }
        let updated = Arc::new(Session {
            grouping,
            grouping_response: Some(response),
            ..(**current).clone()
        });
        *current = updated.clone();
        Some(updated)
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
