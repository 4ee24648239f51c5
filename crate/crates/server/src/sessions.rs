use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use brickmake_core::env::Env;
use uuid::Uuid;

use crate::error::ApiError;

/// One episode. The env lock orders every request against the session.
pub struct Session {
    pub env: Arc<tokio::sync::Mutex<Env>>,
    last_used: Mutex<Instant>,
}

impl Session {
    fn touch(&self, now: Instant) {
        *self.last_used.lock().expect("clock lock") = now;
    }

    fn idle_since(&self, now: Instant) -> Duration {
        now.saturating_duration_since(*self.last_used.lock().expect("clock lock"))
    }
}

pub struct SessionStore {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> Self {
        SessionStore { sessions: Mutex::new(HashMap::new()), idle_timeout }
    }

    pub fn insert(&self, env: Env) -> String {
        let id = Uuid::new_v4().simple().to_string();
        let session = Session { env: Arc::new(tokio::sync::Mutex::new(env)), last_used: Mutex::new(Instant::now()) };
        self.sessions.lock().expect("store lock").insert(id.clone(), Arc::new(session));
        id
    }

    /// Live session by id; an expired one is dropped and reported unknown.
    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let now = Instant::now();
        let mut map = self.sessions.lock().expect("store lock");
        match map.get(id) {
            Some(s) if s.idle_since(now) <= self.idle_timeout => {
                s.touch(now);
                Ok(Arc::clone(s))
            }
            Some(_) => {
                map.remove(id);
                Err(ApiError::UnknownSession(id.to_string()))
            }
            None => Err(ApiError::UnknownSession(id.to_string())),
        }
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        self.sessions
            .lock()
            .expect("store lock")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    /// Drop every expired session; returns how many went.
    pub fn sweep(&self) -> usize {
        let now = Instant::now();
        let mut map = self.sessions.lock().expect("store lock");
        let before = map.len();
        map.retain(|_, s| s.idle_since(now) <= self.idle_timeout);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use brickmake_core::assembly::{Assembly, BrickInstance};
    use brickmake_core::brickfile::{load_shape_library, LibraryConfig};
    use brickmake_core::env::EnvConfig;
    use brickmake_core::math::{Mat3, Vec3};

    fn env() -> Env {
        let lib = Arc::new(load_shape_library(&LibraryConfig::default()).unwrap());
        let target = Assembly::from_instances([BrickInstance::new(1, 3003, 4, Mat3::identity(), Vec3::zeros())]);
        Env::reset(lib, target, EnvConfig::default()).unwrap()
    }

    #[test]
    fn expired_sessions_are_unreachable() {
        let store = SessionStore::new(Duration::ZERO);
        let id = store.insert(env());
        std::thread::sleep(Duration::from_millis(5));
        assert!(matches!(store.get(&id), Err(ApiError::UnknownSession(_))));
        assert!(store.is_empty());
        store.insert(env());
        std::thread::sleep(Duration::from_millis(5));
        assert_eq!(store.sweep(), 1);
    }

    #[test]
    fn ids_are_distinct() {
        let store = SessionStore::new(Duration::from_secs(60));
        let a = store.insert(env());
        let b = store.insert(env());
        assert_ne!(a, b);
        assert!(store.get(&a).is_ok());
        store.remove(&a).unwrap();
        assert!(store.remove(&a).is_err());
        assert_eq!(store.len(), 1);
    }
}
