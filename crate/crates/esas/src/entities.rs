//! The six protocol roles over a file-backed workspace.
//!
//! One [`Workspace`] simulates every entity in-process: the key
//! generation center (setup, registration), data owners (ingestion), the
//! NLPS front end (extraction and vectorization), the authority
//! management server (offline authorization lists, query authentication),
//! the cloud service provider (encrypted scoring, top-k selection) and
//! data users (trapdoors, decryption). Role boundaries are kept in the
//! store layout and the method structure so a transport layer could be
//! added without touching protocol logic.
//!
//! Directory layout under the workspace root:
//!
//! ```text
//! params/   system.env master.env knn.env     (master.env is 0600)
//! owners/   registry.env
//! users/    registry.env <id>.key             (per-user export files)
//! ams/      lists.env ck/<doc>.env
//! csp/      <doc>.env
//! vocab/    vocabulary.env
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use rand::{CryptoRng, Rng};

use crate::codec::{ByteReader, ByteWriter};
use crate::cpabe::{
    authorize, decapsulate_key, encapsulate_key, system_setup, user_keygen, verify_authorization,
    KeyCiphertext, MasterSecret, SystemParams, UserKey,
};
use crate::envelope;
use crate::error::{Error, Result};
use crate::group::GroupContext;
use crate::knn::{encrypt_index, gen_trapdoor, score, OwnerKey, SecureIndex, Trapdoor};
use crate::policy::parse_policy;
use crate::semantic::{
    extract_triples, query_to_vector, vectorize_binary, vectorize_tfidf, ExtractionMode, Triple,
    Vocabulary,
};
use crate::symmetric::{kdf_key, sym_decrypt, sym_encrypt};

/// Everything the cloud server stores for one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentRecord {
    pub id: String,
    pub ck: KeyCiphertext,
    pub index: SecureIndex,
    pub ciphertext: Vec<u8>,
}

/// Registry entry for a data owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnerRecord {
    pub docs_issued: u64,
}

/// Registry entry for a data user: attribute set and the signature
/// verification key. Secret material lives in the user's export file.
#[derive(Clone, Debug)]
pub struct UserRecord {
    pub attributes: BTreeSet<String>,
    pub verify_key: VerifyingKey,
}

/// Secret material delivered to a user at registration.
#[derive(Clone, Debug)]
pub struct UserExport {
    pub user_id: String,
    pub abe_key: UserKey,
    pub signing_key: SigningKey,
}

/// A signed search request as it travels to AMS and CSP.
#[derive(Clone, Debug)]
pub struct QueryRequest {
    pub user_id: String,
    pub k: usize,
    /// sealed trapdoor envelope; the signature covers these exact bytes
    pub trapdoor_envelope: String,
    pub signature: Vec<u8>,
}

/// Document content handed to ingestion.
pub enum DocumentSource {
    /// Raw text; triples are extracted according to the mode.
    Text(Vec<u8>),
    /// Pre-extracted triples alongside the original bytes to encrypt.
    Triples { raw: Vec<u8>, triples: Vec<Triple> },
}

/// Signs trapdoor bytes with a user's signing key.
pub fn sign_query(signing_key: &SigningKey, trapdoor_bytes: &[u8]) -> Vec<u8> {
    signing_key.sign(trapdoor_bytes).to_bytes().to_vec()
}

/// Verifies a query tag against a registered verification key.
pub fn verify_query(verify_key: &VerifyingKey, trapdoor_bytes: &[u8], tag: &[u8]) -> bool {
    let Ok(sig_bytes) = <[u8; 64]>::try_from(tag) else {
        return false;
    };
    verify_key
        .verify(trapdoor_bytes, &Signature::from_bytes(&sig_bytes))
        .is_ok()
}

/// User-side decryption: reconstruct the root value, peel out the
/// document key, derive the symmetric key, open the payload.
pub fn user_decrypt(
    ctx: &GroupContext,
    record: &DocumentRecord,
    ukey: &UserKey,
) -> Result<Vec<u8>> {
    let m_r = authorize(ctx, &record.ck, ukey).ok_or(Error::TreeUnsatisfied)?;
    let k = decapsulate_key(ctx, &record.ck, ukey, &m_r);
    sym_decrypt(&kdf_key(&k), &record.ciphertext)
}

/// The whole six-entity state, mirrored to a workspace directory.
pub struct Workspace {
    root: PathBuf,
    params: SystemParams,
    msk: MasterSecret,
    knn_key: OwnerKey,
    vocab: Vocabulary,
    owners: BTreeMap<String, OwnerRecord>,
    users: BTreeMap<String, UserRecord>,
    user_exports: BTreeMap<String, UserExport>,
    ams_cks: BTreeMap<String, KeyCiphertext>,
    csp_docs: BTreeMap<String, DocumentRecord>,
    auth_lists: BTreeMap<String, BTreeSet<String>>,
}

const KIND_SYSTEM: &str = "system-params";
const KIND_MASTER: &str = "master-secret";
const KIND_KNN: &str = "knn-key";
const KIND_VOCAB: &str = "vocabulary";
const KIND_OWNERS: &str = "owner-registry";
const KIND_USERS: &str = "user-registry";
const KIND_EXPORT: &str = "user-export";
const KIND_CK: &str = "key-ciphertext";
const KIND_DOC: &str = "document-record";
const KIND_LISTS: &str = "authorization-lists";
pub const KIND_TRAPDOOR: &str = "trapdoor";

impl Workspace {
    /// KGC initialization: creates the directory layout, draws the system
    /// parameters, master secret and the system-wide KNN-SE key, and pins
    /// the vocabulary capacity.
    pub fn create<R: Rng + CryptoRng>(
        root: &Path,
        capacity: usize,
        security_level: u32,
        rng: &mut R,
    ) -> Result<Workspace> {
        if capacity == 0 {
            return Err(Error::InvalidParameter(
                "vocabulary capacity must be at least 1".into(),
            ));
        }
        if root.exists() && root.read_dir()?.next().is_some() {
            return Err(Error::Workspace(format!(
                "workspace already exists at {}",
                root.display()
            )));
        }
        let ctx = crate::group::setup_group(security_level)?;
        let (params, msk) = system_setup(ctx, rng);
        let knn_key = crate::knn::owner_keygen(capacity, rng)?;
        let ws = Workspace {
            root: root.to_path_buf(),
            params,
            msk,
            knn_key,
            vocab: Vocabulary::new(capacity),
            owners: BTreeMap::new(),
            users: BTreeMap::new(),
            user_exports: BTreeMap::new(),
            ams_cks: BTreeMap::new(),
            csp_docs: BTreeMap::new(),
            auth_lists: BTreeMap::new(),
        };
        for dir in ["params", "owners", "users", "ams", "ams/ck", "csp", "vocab"] {
            std::fs::create_dir_all(ws.root.join(dir))?;
        }
        write_file(
            &ws.root.join("params/system.env"),
            envelope::seal(KIND_SYSTEM, &ws.params.to_bytes()),
        )?;
        write_file(
            &ws.root.join("params/master.env"),
            envelope::seal(KIND_MASTER, &ws.msk.to_bytes()),
        )?;
        restrict_permissions(&ws.root.join("params/master.env"))?;
        write_file(
            &ws.root.join("params/knn.env"),
            envelope::seal(KIND_KNN, &ws.knn_key.to_bytes()),
        )?;
        ws.save_vocab()?;
        ws.save_owner_registry()?;
        ws.save_user_registry()?;
        ws.save_auth_lists()?;
        Ok(ws)
    }

    /// Loads a workspace directory written by [`Workspace::create`].
    pub fn open(root: &Path) -> Result<Workspace> {
        let read = |rel: String, kind: &str| -> Result<Vec<u8>> {
            let path = root.join(&rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Workspace(format!("cannot read {}: {e}", path.display())))?;
            envelope::open(kind, &text)
        };
        let params = SystemParams::from_bytes(&read("params/system.env".into(), KIND_SYSTEM)?)?;
        let msk = MasterSecret::from_bytes(&read("params/master.env".into(), KIND_MASTER)?)?;
        let knn_key = OwnerKey::from_bytes(&read("params/knn.env".into(), KIND_KNN)?)?;
        let vocab = Vocabulary::from_bytes(&read("vocab/vocabulary.env".into(), KIND_VOCAB)?)?;
        let owners = decode_owner_registry(&read("owners/registry.env".into(), KIND_OWNERS)?)?;
        let users = decode_user_registry(&read("users/registry.env".into(), KIND_USERS)?)?;
        let auth_lists = decode_auth_lists(&read("ams/lists.env".into(), KIND_LISTS)?)?;

        let mut user_exports = BTreeMap::new();
        for id in users.keys() {
            let bytes = read(format!("users/{id}.key"), KIND_EXPORT)?;
            user_exports.insert(id.clone(), UserExport::from_bytes(&bytes)?);
        }
        let mut ams_cks = BTreeMap::new();
        let mut csp_docs = BTreeMap::new();
        for entry in std::fs::read_dir(root.join("csp"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("env") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            let record = DocumentRecord::from_bytes(&envelope::open(KIND_DOC, &text)?)?;
            let ck_text = std::fs::read_to_string(root.join(format!("ams/ck/{}.env", record.id)))?;
            let ck = KeyCiphertext::from_bytes(&envelope::open(KIND_CK, &ck_text)?)?;
            ams_cks.insert(record.id.clone(), ck);
            csp_docs.insert(record.id.clone(), record);
        }
        Ok(Workspace {
            root: root.to_path_buf(),
            params,
            msk,
            knn_key,
            vocab,
            owners,
            users,
            user_exports,
            ams_cks,
            csp_docs,
            auth_lists,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn knn_key(&self) -> &OwnerKey {
        &self.knn_key
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn owner_ids(&self) -> Vec<&str> {
        self.owners.keys().map(String::as_str).collect()
    }

    pub fn user_ids(&self) -> Vec<&str> {
        self.users.keys().map(String::as_str).collect()
    }

    pub fn user_record(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.get(user_id)
    }

    pub fn user_export(&self, user_id: &str) -> Option<&UserExport> {
        self.user_exports.get(user_id)
    }

    pub fn document_ids(&self) -> Vec<&str> {
        self.csp_docs.keys().map(String::as_str).collect()
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.csp_docs.get(doc_id)
    }

    pub fn authorization_list(&self, user_id: &str) -> Option<&BTreeSet<String>> {
        self.auth_lists.get(user_id)
    }

    /// AMS/CSP store consistency: the (ID, CK) projections must agree.
    pub fn stores_consistent(&self) -> bool {
        self.ams_cks.len() == self.csp_docs.len()
            && self
                .ams_cks
                .iter()
                .all(|(id, ck)| self.csp_docs.get(id).is_some_and(|d| &d.ck == ck))
    }

    /// Registers a data owner and binds it to the system-wide KNN-SE key.
    pub fn register_owner(&mut self, owner_id: &str) -> Result<&OwnerKey> {
        validate_id(owner_id)?;
        if self.owners.contains_key(owner_id) {
            return Err(Error::DuplicateId {
                kind: "owner",
                id: owner_id.to_string(),
            });
        }
        self.owners
            .insert(owner_id.to_string(), OwnerRecord { docs_issued: 0 });
        self.save_owner_registry()?;
        Ok(&self.knn_key)
    }

    /// Registers a data user: issues the attribute key and a signing
    /// keypair, writes the export file, and runs offline authorization
    /// for the new user over every stored document.
    pub fn register_user<R: Rng + CryptoRng>(
        &mut self,
        user_id: &str,
        attributes: &BTreeSet<String>,
        rng: &mut R,
    ) -> Result<UserExport> {
        validate_id(user_id)?;
        if self.users.contains_key(user_id) {
            return Err(Error::DuplicateId {
                kind: "user",
                id: user_id.to_string(),
            });
        }
        let abe_key = user_keygen(&self.params, &self.msk, attributes, rng)?;
        let signing_key = SigningKey::generate(rng);
        let record = UserRecord {
            attributes: attributes.clone(),
            verify_key: signing_key.verifying_key(),
        };
        let export = UserExport {
            user_id: user_id.to_string(),
            abe_key,
            signing_key,
        };
        let export_path = self.root.join(format!("users/{user_id}.key"));
        write_file(
            &export_path,
            envelope::seal(KIND_EXPORT, &export.to_bytes()),
        )?;
        restrict_permissions(&export_path)?;
        self.users.insert(user_id.to_string(), record);
        self.user_exports
            .insert(user_id.to_string(), export.clone());

        // offline authorization for the new user, over all documents
        let list: BTreeSet<String> = self
            .ams_cks
            .iter()
            .filter(|(_, ck)| verify_authorization(&self.params.ctx, ck, &export.abe_key))
            .map(|(id, _)| id.clone())
            .collect();
        self.auth_lists.insert(user_id.to_string(), list);

        self.save_user_registry()?;
        self.save_auth_lists()?;
        Ok(export)
    }

    /// Owner ingestion pipeline: triples, vector, secure index, key
    /// encapsulation under the parsed policy, symmetric encryption, store
    /// at CSP and AMS, then authorization refresh for the new document.
    pub fn ingest<R: Rng + CryptoRng>(
        &mut self,
        owner_id: &str,
        source: DocumentSource,
        policy_text: &str,
        mode: ExtractionMode,
        rng: &mut R,
    ) -> Result<String> {
        if !self.owners.contains_key(owner_id) {
            return Err(Error::UnknownId {
                kind: "owner",
                id: owner_id.to_string(),
            });
        }
        let tree = parse_policy(policy_text)?;
        let (document, triples) = match source {
            DocumentSource::Text(bytes) => {
                let text = String::from_utf8_lossy(&bytes).into_owned();
                let triples = extract_triples(&text, mode);
                (bytes, triples)
            }
            DocumentSource::Triples { raw, triples } => (raw, triples),
        };

        self.vocab.ingest_document(&triples)?;
        let vector = match mode {
            ExtractionMode::ThemeSentence => vectorize_binary(&triples, &self.vocab)?,
            ExtractionMode::AllSentences => vectorize_tfidf(&triples, &self.vocab)?,
        };
        let index = encrypt_index(&self.knn_key, &vector, rng)?;
        let (key_element, ck) = encapsulate_key(&self.params, &tree, rng);
        let ciphertext = sym_encrypt(&kdf_key(&key_element), &document, rng);

        let owner = self.owners.get_mut(owner_id).expect("checked above");
        let doc_id = format!("{owner_id}-{:06}", owner.docs_issued);
        owner.docs_issued += 1;

        let record = DocumentRecord {
            id: doc_id.clone(),
            ck: ck.clone(),
            index,
            ciphertext,
        };
        write_file(
            &self.root.join(format!("csp/{doc_id}.env")),
            envelope::seal(KIND_DOC, &record.to_bytes()),
        )?;
        write_file(
            &self.root.join(format!("ams/ck/{doc_id}.env")),
            envelope::seal(KIND_CK, &ck.to_bytes()),
        )?;
        self.csp_docs.insert(doc_id.clone(), record);
        self.ams_cks.insert(doc_id.clone(), ck);

        // refresh-on-ingest: evaluate the new document for every user
        let new_ck = &self.ams_cks[&doc_id];
        for (user_id, export) in &self.user_exports {
            if verify_authorization(&self.params.ctx, new_ck, &export.abe_key) {
                self.auth_lists
                    .entry(user_id.clone())
                    .or_default()
                    .insert(doc_id.clone());
            }
        }

        self.save_vocab()?;
        self.save_owner_registry()?;
        self.save_auth_lists()?;
        Ok(doc_id)
    }

    /// Full AMS recomputation: for every (user, document) pair, list
    /// membership becomes exactly the authorization check. Idempotent.
    pub fn ams_refresh(&mut self) -> Result<()> {
        let mut lists = BTreeMap::new();
        for (user_id, export) in &self.user_exports {
            let list: BTreeSet<String> = self
                .ams_cks
                .iter()
                .filter(|(_, ck)| verify_authorization(&self.params.ctx, ck, &export.abe_key))
                .map(|(id, _)| id.clone())
                .collect();
            lists.insert(user_id.clone(), list);
        }
        self.auth_lists = lists;
        self.save_auth_lists()
    }

    /// Data-user side of a query: vectorize the text, build a trapdoor,
    /// sign its serialized bytes.
    pub fn build_query<R: Rng + CryptoRng>(
        &self,
        user_id: &str,
        query_text: &str,
        k: usize,
        rng: &mut R,
    ) -> Result<QueryRequest> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "result count k must be at least 1".into(),
            ));
        }
        let export = self
            .user_exports
            .get(user_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "user",
                id: user_id.to_string(),
            })?;
        let q = query_to_vector(query_text, &self.vocab);
        let (trapdoor, _a, _r_prime) = gen_trapdoor(&self.knn_key, &q, rng)?;
        let trapdoor_envelope = envelope::seal(KIND_TRAPDOOR, &trapdoor.to_bytes());
        let signature = sign_query(&export.signing_key, trapdoor_envelope.as_bytes());
        Ok(QueryRequest {
            user_id: user_id.to_string(),
            k,
            trapdoor_envelope,
            signature,
        })
    }

    /// AMS + CSP side of a query: authenticate the tag, release the
    /// user's authorization list, score the listed documents and return
    /// the top-k records (score descending, ties by ascending id).
    pub fn execute_query(&self, request: &QueryRequest) -> Result<Vec<DocumentRecord>> {
        if request.k == 0 {
            return Err(Error::InvalidParameter(
                "result count k must be at least 1".into(),
            ));
        }
        let record = self
            .users
            .get(&request.user_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "user",
                id: request.user_id.clone(),
            })?;
        if !verify_query(
            &record.verify_key,
            request.trapdoor_envelope.as_bytes(),
            &request.signature,
        ) {
            return Err(Error::SignatureInvalid);
        }
        let trapdoor =
            Trapdoor::from_bytes(&envelope::open(KIND_TRAPDOOR, &request.trapdoor_envelope)?)?;

        let empty = BTreeSet::new();
        let list = self.auth_lists.get(&request.user_id).unwrap_or(&empty);
        let mut scored = Vec::with_capacity(list.len());
        for doc_id in list {
            let doc = self.csp_docs.get(doc_id).ok_or_else(|| Error::UnknownId {
                kind: "document",
                id: doc_id.clone(),
            })?;
            // dimensions are pinned and slots append-only, so an index is
            // compatible with any query built against the same or a newer
            // vocabulary snapshot
            if doc.index.vocab_version > trapdoor.vocab_version {
                return Err(Error::VocabularyVersion {
                    index: doc.index.vocab_version,
                    query: trapdoor.vocab_version,
                });
            }
            scored.push((score(&doc.index, &trapdoor)?, doc));
        }
        scored.sort_by(|(score_a, doc_a), (score_b, doc_b)| {
            score_b.cmp(score_a).then_with(|| doc_a.id.cmp(&doc_b.id))
        });
        Ok(scored
            .into_iter()
            .take(request.k)
            .map(|(_, doc)| doc.clone())
            .collect())
    }

    /// Whole query flow for one user: build, sign, authenticate, score.
    pub fn query<R: Rng + CryptoRng>(
        &self,
        user_id: &str,
        query_text: &str,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<DocumentRecord>> {
        let request = self.build_query(user_id, query_text, k, rng)?;
        self.execute_query(&request)
    }

    /// Decrypts a stored document with a registered user's key.
    pub fn decrypt(&self, user_id: &str, doc_id: &str) -> Result<Vec<u8>> {
        let export = self
            .user_exports
            .get(user_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "user",
                id: user_id.to_string(),
            })?;
        let record = self.csp_docs.get(doc_id).ok_or_else(|| Error::UnknownId {
            kind: "document",
            id: doc_id.to_string(),
        })?;
        user_decrypt(&self.params.ctx, record, &export.abe_key)
    }

    fn save_vocab(&self) -> Result<()> {
        write_file(
            &self.root.join("vocab/vocabulary.env"),
            envelope::seal(KIND_VOCAB, &self.vocab.to_bytes()),
        )
    }

    fn save_owner_registry(&self) -> Result<()> {
        let mut w = ByteWriter::new();
        w.put_u32(self.owners.len() as u32);
        for (id, record) in &self.owners {
            w.put_str(id);
            w.put_u64(record.docs_issued);
        }
        write_file(
            &self.root.join("owners/registry.env"),
            envelope::seal(KIND_OWNERS, &w.into_bytes()),
        )
    }

    fn save_user_registry(&self) -> Result<()> {
        let mut w = ByteWriter::new();
        w.put_u32(self.users.len() as u32);
        for (id, record) in &self.users {
            w.put_str(id);
            w.put_u32(record.attributes.len() as u32);
            for attribute in &record.attributes {
                w.put_str(attribute);
            }
            w.put_bytes(record.verify_key.as_bytes());
        }
        write_file(
            &self.root.join("users/registry.env"),
            envelope::seal(KIND_USERS, &w.into_bytes()),
        )
    }

    fn save_auth_lists(&self) -> Result<()> {
        let mut w = ByteWriter::new();
        w.put_u32(self.auth_lists.len() as u32);
        for (user_id, docs) in &self.auth_lists {
            w.put_str(user_id);
            w.put_u32(docs.len() as u32);
            for doc_id in docs {
                w.put_str(doc_id);
            }
        }
        write_file(
            &self.root.join("ams/lists.env"),
            envelope::seal(KIND_LISTS, &w.into_bytes()),
        )
    }
}

fn decode_owner_registry(bytes: &[u8]) -> Result<BTreeMap<String, OwnerRecord>> {
    let mut r = ByteReader::new(bytes);
    let count = r.get_u32()? as usize;
    let mut out = BTreeMap::new();
    for _ in 0..count {
        let id = r.get_str()?;
        let docs_issued = r.get_u64()?;
        out.insert(id, OwnerRecord { docs_issued });
    }
    r.finish()?;
    Ok(out)
}

fn decode_user_registry(bytes: &[u8]) -> Result<BTreeMap<String, UserRecord>> {
    let mut r = ByteReader::new(bytes);
    let count = r.get_u32()? as usize;
    let mut out = BTreeMap::new();
    for _ in 0..count {
        let id = r.get_str()?;
        let attr_count = r.get_u32()? as usize;
        let mut attributes = BTreeSet::new();
        for _ in 0..attr_count {
            attributes.insert(r.get_str()?);
        }
        let key_bytes: [u8; 32] = r
            .get_bytes()?
            .try_into()
            .map_err(|_| Error::Decode("verification key must be 32 bytes".into()))?;
        let verify_key = VerifyingKey::from_bytes(&key_bytes)
            .map_err(|e| Error::Decode(format!("verification key: {e}")))?;
        out.insert(
            id,
            UserRecord {
                attributes,
                verify_key,
            },
        );
    }
    r.finish()?;
    Ok(out)
}

fn decode_auth_lists(bytes: &[u8]) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut r = ByteReader::new(bytes);
    let count = r.get_u32()? as usize;
    let mut out = BTreeMap::new();
    for _ in 0..count {
        let user_id = r.get_str()?;
        let doc_count = r.get_u32()? as usize;
        let mut docs = BTreeSet::new();
        for _ in 0..doc_count {
            docs.insert(r.get_str()?);
        }
        out.insert(user_id, docs);
    }
    r.finish()?;
    Ok(out)
}

impl UserExport {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_str(&self.user_id);
        w.put_bytes(&self.abe_key.to_bytes());
        w.put_bytes(self.signing_key.as_bytes());
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let user_id = r.get_str()?;
        let abe_key = UserKey::from_bytes(r.get_bytes()?)?;
        let sk_bytes: [u8; 32] = r
            .get_bytes()?
            .try_into()
            .map_err(|_| Error::Decode("signing key must be 32 bytes".into()))?;
        r.finish()?;
        Ok(UserExport {
            user_id,
            abe_key,
            signing_key: SigningKey::from_bytes(&sk_bytes),
        })
    }
}

impl DocumentRecord {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_str(&self.id);
        w.put_bytes(&self.ck.to_bytes());
        w.put_bytes(&self.index.to_bytes());
        w.put_bytes(&self.ciphertext);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let id = r.get_str()?;
        let ck = KeyCiphertext::from_bytes(r.get_bytes()?)?;
        let index = SecureIndex::from_bytes(r.get_bytes()?)?;
        let ciphertext = r.get_bytes()?.to_vec();
        r.finish()?;
        Ok(DocumentRecord {
            id,
            ck,
            index,
            ciphertext,
        })
    }
}

/// Ids become file names; restrict them accordingly.
fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        && id.as_bytes()[0].is_ascii_alphanumeric();
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "id {id:?} must be [A-Za-z0-9][A-Za-z0-9_-]* and at most 64 bytes"
        )))
    }
}

/// Write-then-rename so readers never observe a torn file.
fn write_file(path: &Path, contents: String) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(unix)]
fn restrict_permissions(path: &Path) -> Result<()> {
    use std::os::unix::fs::PermissionsExt;
    let mut perms = std::fs::metadata(path)?.permissions();
    perms.set_mode(0o600);
    std::fs::set_permissions(path, perms)?;
    Ok(())
}

#[cfg(not(unix))]
fn restrict_permissions(_path: &Path) -> Result<()> {
    Ok(())
}

/// Advisory writer lock for mutating commands: created exclusively,
/// removed on drop.
pub struct WorkspaceLock {
    path: PathBuf,
}

impl WorkspaceLock {
    pub fn acquire(root: &Path) -> Result<WorkspaceLock> {
        let path = root.join(".lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(WorkspaceLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Workspace(format!(
                    "workspace is locked by another process ({})",
                    path.display()
                )))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
