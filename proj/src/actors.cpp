#include "ivt/actors.hpp"

#include <algorithm>
#include <sstream>

namespace ivt::actors {

using nlohmann::ordered_json;

namespace {
constexpr const char* kFactoryVersion = "v1.0";
const Duration kManufacturerThreshold = Duration::days(14);

std::vector<std::uint64_t> version_segments(const std::string& v) {
    std::string body = (!v.empty() && (v[0] == 'v' || v[0] == 'V')) ? v.substr(1) : v;
    std::vector<std::uint64_t> out;
    std::stringstream ss(body);
    std::string seg;
    while (std::getline(ss, seg, '.')) {
        try {
            out.push_back(std::stoull(seg));
        } catch (const std::exception&) {
            out.push_back(0);
        }
    }
    return out;
}
}  // namespace

bool version_less(const std::string& a, const std::string& b) {
    auto sa = version_segments(a);
    auto sb = version_segments(b);
    size_t n = std::max(sa.size(), sb.size());
    for (size_t i = 0; i < n; ++i) {
        std::uint64_t va = i < sa.size() ? sa[i] : 0;
        std::uint64_t vb = i < sb.size() ? sb[i] : 0;
        if (va != vb) return va < vb;
    }
    return false;
}

Bytes SimNetwork::send(Timestamp now, const std::string& from, const std::string& to,
                       const std::string& kind, Bytes payload) {
    auto it = tamper_.find({from, to});
    Bytes delivered = it != tamper_.end() ? it->second(payload) : payload;
    capture_.push_back({now, from, to, kind, delivered});
    return delivered;
}

void SimNetwork::set_tamper(const std::string& from, const std::string& to, TamperFn fn) {
    tamper_[{from, to}] = std::move(fn);
}

void SimNetwork::clear_tamper(const std::string& from, const std::string& to) {
    tamper_.erase({from, to});
}

std::string SimNetwork::capture_jsonl() const {
    std::string out;
    for (const auto& rec : capture_) {
        ordered_json j = {{"time", rec.time.to_string()},
                          {"from", rec.from},
                          {"to", rec.to},
                          {"kind", rec.kind},
                          {"payload_digest", crypto::sha256(rec.payload).hex()},
                          {"payload_size", rec.payload.size()}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

void UpdateServer::store(const std::string& uri, Bytes binary) {
    binaries_[uri] = std::move(binary);
}

std::optional<Bytes> UpdateServer::fetch(const std::string& uri) const {
    auto it = binaries_.find(uri);
    if (it == binaries_.end()) return std::nullopt;
    return it->second;
}

FirmwareImage FirmwareImage::make(std::vector<std::string> models, std::string version,
                                  Bytes binary) {
    FirmwareImage img;
    img.model_list = std::move(models);
    img.version = std::move(version);
    img.binary_digest = crypto::sha256(binary);
    img.binary = std::move(binary);
    return img;
}

ordered_json ProofValue::to_json() const {
    return {{"version", version},
            {"installTimestamp", install_timestamp.to_string()},
            {"reset", reset},
            {"mac", mac.hex()}};
}

ProofValue ProofValue::from_json(const ordered_json& j) {
    ProofValue p;
    p.version = j.at("version").get<std::string>();
    p.install_timestamp = Timestamp::parse(j.at("installTimestamp").get<std::string>());
    p.reset = j.at("reset").get<bool>();
    p.mac = crypto::Digest::from_hex(j.at("mac").get<std::string>());
    return p;
}

crypto::Digest proof_mac(ByteView device_secret, const std::string& version,
                         const crypto::Digest& binary_digest, Timestamp installed_at, bool reset) {
    std::string input = version + "|" + binary_digest.hex() + "|" + installed_at.to_string() + "|" +
                        (reset ? "reset" : "install");
    return crypto::hmac_sha256(device_secret, to_bytes(input));
}

const vc::InverterCredential* Wallet::current_credential() const {
    if (inverter_credentials.empty()) return nullptr;
    return &inverter_credentials.begin()->second;
}

const char* to_string(InstallOutcome o) {
    switch (o) {
        case InstallOutcome::Installed: return "Installed";
        case InstallOutcome::IgnoredModel: return "IgnoredModel";
        case InstallOutcome::IgnoredVersion: return "IgnoredVersion";
        case InstallOutcome::HashMismatch: return "HashMismatch";
        case InstallOutcome::BadIssuer: return "BadIssuer";
        case InstallOutcome::FetchFailed: return "FetchFailed";
    }
    return "?";
}

const char* to_string(Rejection r) {
    switch (r) {
        case Rejection::DecryptFailed: return "DecryptFailed";
        case Rejection::MalformedRequest: return "MalformedRequest";
        case Rejection::BadSignature: return "BadSignature";
        case Rejection::NotOwner: return "NotOwner";
        case Rejection::UnknownInverter: return "UnknownInverter";
        case Rejection::StaleCredential: return "StaleCredential";
        case Rejection::InvalidCredential: return "InvalidCredential";
        case Rejection::InvalidProof: return "InvalidProof";
        case Rejection::ProofReplayed: return "ProofReplayed";
        case Rejection::VersionNotNewer: return "VersionNotNewer";
    }
    return "?";
}

const char* to_string(InstallVcOutcome o) {
    switch (o) {
        case InstallVcOutcome::Ok: return "Ok";
        case InstallVcOutcome::DecryptFailed: return "DecryptFailed";
        case InstallVcOutcome::MalformedResponse: return "MalformedResponse";
        case InstallVcOutcome::BadSignature: return "BadSignature";
        case InstallVcOutcome::ReplayAlarm: return "ReplayAlarm";
        case InstallVcOutcome::WrongIssuer: return "WrongIssuer";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Inverter

std::vector<InstallOutcome> Inverter::poll_updates(World& world, Timestamp now) {
    std::vector<InstallOutcome> outcomes;
    for (const auto& event : world.ledger.poll(contract_id_, name_)) {
        world.network.send(now, "ledger", name_, "update-event",
                           to_bytes(vc::compact_encoding(event.credential)));
        outcomes.push_back(handle_update_event(world, event, now));
    }
    return outcomes;
}

InstallOutcome Inverter::handle_update_event(World& world, const ledger::UpdateEvent& event,
                                             Timestamp now) {
    const auto& models = event.model_list;
    if (std::find(models.begin(), models.end(), model_) == models.end()) {
        return InstallOutcome::IgnoredModel;
    }
    if (!version_less(installed_version_, event.version)) {
        return InstallOutcome::IgnoredVersion;
    }
    const vc::FirmwareCredential& update_vc = event.credential;
    if (update_vc.issuer != manufacturer_did_ ||
        !vc::verify_credential(update_vc, world.registry).valid()) {
        return InstallOutcome::BadIssuer;
    }

    // Download link from the credential; fall back to the manufacturer's
    // UpdateServer endpoint.  Three attempts before giving up.
    std::string link = update_vc.link;
    if (link.empty()) {
        const auto& doc = world.registry.resolve(manufacturer_did_);
        for (const auto& svc : doc.services) {
            if (svc.type == did::ServiceType::UpdateServer) {
                link = svc.uri + "/" + event.version;
                break;
            }
        }
    }
    std::optional<Bytes> binary;
    for (int attempt = 0; attempt < 3 && !binary; ++attempt) {
        world.network.send(now, name_, UpdateServer::kName, "fetch-request", to_bytes(link));
        binary = world.server.fetch(link);
    }
    if (!binary) return InstallOutcome::FetchFailed;
    Bytes delivered = world.network.send(now, UpdateServer::kName, name_, "firmware-binary", *binary);

    if (crypto::sha256(delivered) != update_vc.firmware_info.binary_hash) {
        return InstallOutcome::HashMismatch;
    }

    installed_version_ = event.version;
    install_log_.push_back({event.version, now});
    pending_proof_ = ProofValue{event.version, now, false,
                                proof_mac(device_secret_, event.version,
                                          update_vc.firmware_info.binary_hash, now, false)};
    wallet_.firmware_credentials[update_vc.id] = update_vc;
    return InstallOutcome::Installed;
}

InstallOutcome Inverter::install_offline(World& world, const Bytes& binary,
                                         const vc::FirmwareCredential& update_vc, Timestamp now) {
    const auto& models = update_vc.supporting_models;
    if (std::find(models.begin(), models.end(), model_) == models.end()) {
        return InstallOutcome::IgnoredModel;
    }
    if (!version_less(installed_version_, update_vc.firmware_info.version)) {
        return InstallOutcome::IgnoredVersion;
    }
    if (update_vc.issuer != manufacturer_did_ ||
        !vc::verify_credential(update_vc, world.registry).valid()) {
        return InstallOutcome::BadIssuer;
    }
    if (crypto::sha256(binary) != update_vc.firmware_info.binary_hash) {
        return InstallOutcome::HashMismatch;
    }
    installed_version_ = update_vc.firmware_info.version;
    install_log_.push_back({installed_version_, now});
    pending_proof_ = ProofValue{installed_version_, now, false,
                                proof_mac(device_secret_, installed_version_,
                                          update_vc.firmware_info.binary_hash, now, false)};
    wallet_.firmware_credentials[update_vc.id] = update_vc;
    return InstallOutcome::Installed;
}

ProofValue Inverter::factory_reset(Timestamp now) {
    installed_version_ = factory_version_;
    install_log_.clear();
    install_log_.push_back({factory_version_, now});
    pending_proof_ = ProofValue{factory_version_, now, true,
                                proof_mac(device_secret_, factory_version_, crypto::Digest{}, now,
                                          true)};
    return *pending_proof_;
}

std::optional<std::pair<ProofValue, vc::InverterCredential>> Inverter::take_renewal_material() {
    if (!pending_proof_) return std::nullopt;
    const vc::InverterCredential* current = wallet_.current_credential();
    if (!current) return std::nullopt;
    auto out = std::make_pair(*pending_proof_, *current);
    pending_proof_.reset();
    return out;
}

bool Inverter::store_new_credential(const vc::InverterCredential& credential) {
    if (credential.issuer != manufacturer_did_) return false;
    wallet_.inverter_credentials.clear();  // remove old VCs
    wallet_.inverter_credentials.emplace(credential.id, credential);
    return true;
}

// ---------------------------------------------------------------------------
// Manufacturer

Manufacturer::Manufacturer(World& world, std::string name, Timestamp now) : name_(std::move(name)) {
    kp_ = crypto::KeyPair::generate(world.rng);
    std::vector<did::ServiceEndpoint> services = {
        {did::ServiceType::UpdateServer, "sim://updates/" + name_},
        {did::ServiceType::VCIssuance, "sim://vc-issuance/" + name_},
        {did::ServiceType::UpdateList, "sim://update-list/" + name_},
    };
    auto [id, doc] = world.registry.create_did("sim", kp_, services, world.rng);
    did_ = id;
    world.actor_names[did_.rendered()] = name_;

    auto deploy_digest = crypto::sha256(to_bytes("deploy:" + did_.rendered()));
    auto handle = world.ledger.deploy_contract(did_, kp_.sign(deploy_digest.bytes), now);
    contract_id_ = handle.contract_id;
}

std::string Manufacturer::update_link(const std::string& version) const {
    return "sim://updates/" + name_ + "/" + version;
}

std::optional<crypto::Digest> Manufacturer::published_digest(const std::string& version) const {
    auto it = published_.find(version);
    if (it == published_.end()) return std::nullopt;
    return it->second.digest;
}

std::unique_ptr<Inverter> Manufacturer::manufacture_inverter(World& world,
                                                             const std::string& model,
                                                             const std::string& serial,
                                                             Timestamp now,
                                                             const did::Did* initial_owner) {
    if (!serials_.insert(serial).second) {
        throw std::invalid_argument("duplicate serial: " + serial);
    }
    auto inverter = std::unique_ptr<Inverter>(new Inverter());
    inverter->name_ = name_ + "/" + serial;
    inverter->model_ = model;
    inverter->serial_ = serial;
    inverter->factory_version_ = kFactoryVersion;
    inverter->installed_version_ = kFactoryVersion;
    inverter->manufacturer_did_ = did_;
    inverter->contract_id_ = contract_id_;
    inverter->device_secret_.resize(32);
    world.rng.fill(inverter->device_secret_);

    crypto::KeyPair inverter_kp = crypto::KeyPair::generate(world.rng);
    did::Did inverter_did{"sim", world.rng.random_hex(16)};
    did::DIDDocument doc = did::DIDDocument::for_keypair(inverter_did, inverter_kp, {});
    doc.controller = did_;
    world.registry.register_document(doc);
    inverter->did_ = inverter_did;
    inverter->wallet_.keys = inverter_kp;
    inverter->wallet_.owner_did = inverter_did;
    world.actor_names[inverter_did.rendered()] = inverter->name_;

    device_secrets_[inverter_did.rendered()] = inverter->device_secret_;
    inverter_meta_[inverter_did.rendered()] = {model, serial};
    inverter->install_log_.push_back({kFactoryVersion, now});

    vc::InverterCredential initial =
        issue_for(world, inverter.get(), inverter_did, initial_owner ? *initial_owner : did_,
                  {kFactoryVersion, now}, nullptr, {}, now);
    inverter->wallet_.inverter_credentials.emplace(initial.id, initial);

    world.ledger.subscribe(contract_id_, inverter->name_, world.ledger.log_size(contract_id_));
    return inverter;
}

did::DIDDocument Manufacturer::transfer_ownership(World& world, const Inverter& inverter,
                                                  const did::Did& owner, Timestamp /*now*/) {
    did::DIDDocument doc = world.registry.resolve(inverter.did());
    doc.controller = owner;
    doc.version += 1;
    crypto::Signature sig = kp_.sign(doc.canonical_bytes());
    return world.registry.update_document(inverter.did(), doc, sig);
}

std::pair<vc::FirmwareCredential, ledger::UpdateEvent> Manufacturer::publish_firmware(
    World& world, const FirmwareImage& image, vc::UpdateType update_type,
    std::vector<std::string> cves, Timestamp now) {
    if (crypto::sha256(image.binary) != image.binary_digest) {
        throw std::invalid_argument("firmware image digest mismatch");
    }
    std::string link = update_link(image.version);
    world.server.store(link, image.binary);
    world.network.send(now, name_, UpdateServer::kName, "firmware-publish", image.binary);
    published_[image.version] = {image.binary_digest, now, image.model_list};

    vc::FirmwareMetadata meta;
    meta.version = image.version;
    meta.binary_hash = image.binary_digest;
    meta.update_type = update_type;
    meta.released_date = now;
    meta.link = link;
    meta.associated_cves = std::move(cves);
    meta.supporting_models = image.model_list;
    vc::FirmwareCredential fw_vc = vc::issue_firmware_credential(
        kp_, did_, "vc:fw:" + name_ + ":" + std::to_string(++vc_counter_), now, meta);

    ledger::SaveUpdateRequest request{fw_vc, did_, world.rng.nonce()};
    crypto::Signature sig = kp_.sign(crypto::sha256(request.canonical_bytes()).bytes);
    world.network.send(now, name_, "ledger", "save-update", request.canonical_bytes());
    ledger::UpdateEvent event = world.ledger.save_update(contract_id_, request, sig, now);
    return {fw_vc, event};
}

vc::InverterCredential Manufacturer::issue_for(World& world, const Inverter* /*inverter_ptr*/,
                                               const did::Did& inverter_did, const did::Did& owner,
                                               vc::HistoryEntry head,
                                               const vc::InverterCredential* previous,
                                               std::vector<Timestamp> reset_history, Timestamp now) {
    const auto& [model, serial] = inverter_meta_.at(inverter_did.rendered());

    // Flags against the manufacturer's default threshold; operators recompute.
    std::vector<vc::HistoryEntry> history{head};
    if (previous) {
        history.insert(history.end(), previous->firmware_history.begin(),
                       previous->firmware_history.end());
    }
    std::vector<Timestamp> resets = reset_history;
    if (resets.empty() && previous) resets = previous->reset_history;
    std::optional<Timestamp> latest_reset;
    if (!resets.empty()) latest_reset = resets.front();

    bool timely = true;
    bool missing = false;
    for (const auto& [version, info] : published_) {
        const auto& models = info.models;
        if (std::find(models.begin(), models.end(), model) == models.end()) continue;
        if (latest_reset && !(info.released > *latest_reset)) continue;
        auto it = std::find_if(history.begin(), history.end(),
                               [&](const vc::HistoryEntry& e) { return e.version == version; });
        if (it == history.end()) {
            missing = true;
        } else {
            timely = timely && (info.released + kManufacturerThreshold > it->installed_at);
        }
    }

    vc::InverterStateFields state;
    state.inverter_id = inverter_did;
    state.serial_no = serial;
    state.manufactured_date = previous ? previous->immutable.manufactured_date : now;
    state.owner = owner;
    state.status = vc::InverterStatus::Active;
    state.timely_updated = timely;
    state.missing_updates = missing;

    std::string credential_id = "vc:inverter:" + name_ + ":" + std::to_string(++vc_counter_);
    vc::InverterCredential issued = vc::issue_inverter_credential(
        kp_, did_, credential_id, now, state, head, previous, std::move(reset_history));
    latest_credential_[inverter_did.rendered()] = issued;
    (void)world;
    return issued;
}

void Manufacturer::revoke(World& world, const std::string& credential_id) {
    auto digest = crypto::sha256(to_bytes("revoke:" + credential_id));
    world.registry.revoke_credential(did_, credential_id, kp_.sign(digest.bytes));
}

std::variant<Bytes, Rejection> Manufacturer::handle_vc_request(World& world,
                                                               const Bytes& envelope_raw,
                                                               Timestamp now) {
    auto envelope = crypto::Envelope::deserialize(envelope_raw);
    if (!envelope) return Rejection::DecryptFailed;
    auto plain = crypto::decrypt(*envelope, kp_);
    if (!plain) return Rejection::DecryptFailed;

    ordered_json wrapper, msg;
    crypto::Signature owner_sig;
    did::Did inverter_did, owner_did;
    ProofValue proof;
    vc::InverterCredential current_vc;
    crypto::Nonce nonce;
    try {
        wrapper = ordered_json::parse(ivt::to_string(*plain));
        msg = wrapper.at("msg");
        auto inv = did::Did::parse(msg.at("inverterDid").get<std::string>());
        auto own = did::Did::parse(msg.at("ownerDid").get<std::string>());
        if (!inv || !own) return Rejection::MalformedRequest;
        inverter_did = *inv;
        owner_did = *own;
        proof = ProofValue::from_json(msg.at("proof"));
        current_vc = vc::decode_inverter(msg.at("currentVc").get<std::string>());
        nonce = crypto::Nonce::from_hex(msg.at("nonce").get<std::string>());
        owner_sig.key_id = wrapper.at("sig").at("kid").get<std::string>();
        Bytes raw = hex_decode(wrapper.at("sig").at("value").get<std::string>());
        if (raw.size() != owner_sig.bytes.size()) return Rejection::MalformedRequest;
        std::copy(raw.begin(), raw.end(), owner_sig.bytes.begin());
    } catch (const std::exception&) {
        return Rejection::MalformedRequest;
    }

    // Owner authentication.
    if (!world.registry.contains(owner_did)) return Rejection::BadSignature;
    auto owner_key = world.registry.resolve(owner_did).key_for(did::KeyPurpose::Authentication);
    auto msg_digest = crypto::sha256(to_bytes(msg.dump()));
    if (!owner_key || !crypto::verify(msg_digest.bytes, owner_sig, *owner_key)) {
        return Rejection::BadSignature;
    }

    // Ownership via the inverter document's controller.
    if (!world.registry.contains(inverter_did)) return Rejection::UnknownInverter;
    const auto& inverter_doc = world.registry.resolve(inverter_did);
    if (!inverter_doc.controller || *inverter_doc.controller != owner_did) {
        return Rejection::NotOwner;
    }

    // Current credential must be valid and the latest issued for this inverter.
    auto result = vc::verify_credential(current_vc, world.registry);
    if (!result.valid()) return Rejection::InvalidCredential;
    auto latest = latest_credential_.find(inverter_did.rendered());
    if (latest == latest_credential_.end()) return Rejection::UnknownInverter;
    if (latest->second.id != current_vc.id) return Rejection::StaleCredential;

    // One-time proof-of-install validation.
    auto secret = device_secrets_.find(inverter_did.rendered());
    if (secret == device_secrets_.end()) return Rejection::UnknownInverter;
    crypto::Digest expected_digest;  // zero digest for reset proofs
    if (!proof.reset) {
        auto published = published_digest(proof.version);
        if (!published) return Rejection::InvalidProof;
        expected_digest = *published;
    }
    crypto::Digest expected_mac = proof_mac(secret->second, proof.version, expected_digest,
                                            proof.install_timestamp, proof.reset);
    if (expected_mac != proof.mac) return Rejection::InvalidProof;
    if (consumed_proofs_.contains(proof.mac.hex())) return Rejection::ProofReplayed;
    const std::string& head_version = current_vc.firmware_history.front().version;
    if (!proof.reset) {
        if (!version_less(head_version, proof.version)) return Rejection::VersionNotNewer;
        if (proof.install_timestamp <= current_vc.firmware_history.front().installed_at) {
            return Rejection::InvalidProof;
        }
    }
    consumed_proofs_.insert(proof.mac.hex());

    // Issue, revoke, reply with nonce + 1.
    vc::InverterCredential renewed;
    if (proof.reset) {
        std::vector<Timestamp> resets{proof.install_timestamp};
        resets.insert(resets.end(), current_vc.reset_history.begin(),
                      current_vc.reset_history.end());
        renewed = issue_for(world, nullptr, inverter_did, owner_did,
                            {proof.version, proof.install_timestamp}, nullptr, std::move(resets),
                            now);
    } else {
        renewed = issue_for(world, nullptr, inverter_did, owner_did,
                            {proof.version, proof.install_timestamp}, &current_vc, {}, now);
    }
    revoke(world, current_vc.id);

    ordered_json response_msg = {{"vc", vc::compact_encoding(renewed)},
                                 {"nonceEcho", nonce.next().hex()}};
    crypto::Signature response_sig = kp_.sign(crypto::sha256(to_bytes(response_msg.dump())).bytes);
    ordered_json response = {{"msg", response_msg},
                             {"sig", {{"kid", response_sig.key_id},
                                      {"value", hex_encode(response_sig.bytes)}}}};
    crypto::Envelope sealed = crypto::encrypt_for(*owner_key, to_bytes(response.dump()), world.rng);
    (void)now;
    return sealed.serialize();
}

// ---------------------------------------------------------------------------
// Owner

Owner::Owner(World& world, std::string name, Timestamp /*now*/) : name_(std::move(name)) {
    kp_ = crypto::KeyPair::generate(world.rng);
    auto [id, doc] = world.registry.create_did("sim", kp_, {}, world.rng);
    did_ = id;
    world.actor_names[did_.rendered()] = name_;
}

Bytes Owner::request_new_vc(World& world, Inverter& inverter, const did::Did& manufacturer_did,
                            Timestamp now) {
    auto material = inverter.take_renewal_material();
    if (!material) throw std::runtime_error("no pending proof value for " + inverter.name());
    const auto& [proof, current] = *material;

    crypto::Nonce nonce = world.rng.nonce();
    ordered_json msg = {{"inverterDid", inverter.did().rendered()},
                        {"ownerDid", did_.rendered()},
                        {"proof", proof.to_json()},
                        {"currentVc", vc::compact_encoding(current)},
                        {"timestamp", now.to_string()},
                        {"nonce", nonce.hex()}};
    crypto::Signature sig = kp_.sign(crypto::sha256(to_bytes(msg.dump())).bytes);
    ordered_json wrapper = {{"msg", msg},
                            {"sig", {{"kid", sig.key_id}, {"value", hex_encode(sig.bytes)}}}};

    auto manufacturer_key =
        world.registry.resolve(manufacturer_did).key_for(did::KeyPurpose::Authentication);
    if (!manufacturer_key) throw std::runtime_error("manufacturer has no authentication key");
    crypto::Envelope sealed = crypto::encrypt_for(*manufacturer_key, to_bytes(wrapper.dump()),
                                                  world.rng);
    pending_[inverter.did().rendered()] = nonce;
    Bytes raw = sealed.serialize();
    world.network.send(now, name_, world.name_of(manufacturer_did), "vc-request", raw);
    return raw;
}

InstallVcOutcome Owner::install_vc(World& world, Inverter& inverter, const Bytes& response_raw,
                                   Timestamp now) {
    auto envelope = crypto::Envelope::deserialize(response_raw);
    if (!envelope) return InstallVcOutcome::DecryptFailed;
    auto plain = crypto::decrypt(*envelope, kp_);
    if (!plain) return InstallVcOutcome::DecryptFailed;

    ordered_json wrapper, msg;
    crypto::Signature sig;
    vc::InverterCredential renewed;
    crypto::Nonce echo;
    try {
        wrapper = ordered_json::parse(ivt::to_string(*plain));
        msg = wrapper.at("msg");
        renewed = vc::decode_inverter(msg.at("vc").get<std::string>());
        echo = crypto::Nonce::from_hex(msg.at("nonceEcho").get<std::string>());
        sig.key_id = wrapper.at("sig").at("kid").get<std::string>();
        Bytes raw = hex_decode(wrapper.at("sig").at("value").get<std::string>());
        if (raw.size() != sig.bytes.size()) return InstallVcOutcome::MalformedResponse;
        std::copy(raw.begin(), raw.end(), sig.bytes.begin());
    } catch (const std::exception&) {
        return InstallVcOutcome::MalformedResponse;
    }

    auto manufacturer_key = world.registry.resolve(inverter.manufacturer_did())
                                .key_for(did::KeyPurpose::Authentication);
    auto digest = crypto::sha256(to_bytes(msg.dump()));
    if (!manufacturer_key || !crypto::verify(digest.bytes, sig, *manufacturer_key)) {
        return InstallVcOutcome::BadSignature;
    }

    auto pending = pending_.find(inverter.did().rendered());
    if (pending == pending_.end() || pending->second.next() != echo) {
        return InstallVcOutcome::ReplayAlarm;
    }
    if (renewed.issuer != inverter.manufacturer_did()) return InstallVcOutcome::WrongIssuer;
    pending_.erase(pending);

    // Upload to the inverter over the captured network, sealed for its wallet.
    crypto::Envelope upload = crypto::encrypt_for(inverter.wallet().keys.verification_key(),
                                                  to_bytes(vc::compact_encoding(renewed)),
                                                  world.rng);
    world.network.send(now, name_, inverter.name(), "vc-upload", upload.serialize());
    if (!inverter.store_new_credential(renewed)) return InstallVcOutcome::WrongIssuer;
    return InstallVcOutcome::Ok;
}

Bytes Owner::present_for_enrollment(World& world, const Inverter& inverter,
                                    const crypto::VerificationKey& operator_key, Timestamp now) {
    const vc::InverterCredential* current = inverter.wallet().current_credential();
    if (!current) throw std::runtime_error("inverter wallet holds no credential");
    crypto::Signature sig =
        kp_.sign(crypto::sha256(trust::presentation_signing_bytes(*current, did_)).bytes);
    ordered_json presentation = {{"vc", vc::compact_encoding(*current)},
                                 {"presenter", did_.rendered()},
                                 {"sig", {{"kid", sig.key_id}, {"value", hex_encode(sig.bytes)}}}};
    crypto::Envelope sealed =
        crypto::encrypt_for(operator_key, to_bytes(presentation.dump()), world.rng);
    Bytes raw = sealed.serialize();
    world.network.send(now, name_, "vpp-operator", "enrollment-presentation", raw);
    return raw;
}

}  // namespace ivt::actors
