#include "ivt/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace ivt::crypto {

namespace {
void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("sodium_init failed");
}

// Nonce for the box: hash of ephemeral and recipient public keys, as in
// libsodium's sealed boxes.
std::array<unsigned char, crypto_box_NONCEBYTES> box_nonce(const unsigned char* epk,
                                                           const unsigned char* rpk) {
    std::array<unsigned char, crypto_box_NONCEBYTES> nonce{};
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, nonce.size());
    crypto_generichash_update(&st, epk, crypto_box_PUBLICKEYBYTES);
    crypto_generichash_update(&st, rpk, crypto_box_PUBLICKEYBYTES);
    crypto_generichash_final(&st, nonce.data(), nonce.size());
    return nonce;
}
}  // namespace

Digest Digest::from_hex(const std::string& hex) {
    Bytes raw = hex_decode(hex);
    if (raw.size() != kDigestSize) throw std::invalid_argument("digest must be 32 bytes");
    Digest d;
    std::memcpy(d.bytes.data(), raw.data(), kDigestSize);
    return d;
}

Digest sha256(ByteView data) {
    ensure_sodium();
    Digest d;
    crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
    return d;
}

Digest hmac_sha256(ByteView key, ByteView data) {
    ensure_sodium();
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, data.data(), data.size());
    Digest d;
    crypto_auth_hmacsha256_final(&st, d.bytes.data());
    return d;
}

std::string key_id_of(const VerificationKey& vk) {
    Digest d = sha256(vk);
    return hex_encode(ByteView(d.bytes.data(), 8));
}

KeyPair KeyPair::generate() {
    ensure_sodium();
    KeyPair kp;
    crypto_sign_keypair(kp.vk_.data(), kp.sk_.data());
    kp.key_id_ = key_id_of(kp.vk_);
    return kp;
}

KeyPair KeyPair::from_seed(ByteView seed) {
    ensure_sodium();
    if (seed.size() != kSeedSize) throw std::invalid_argument("seed must be 32 bytes");
    KeyPair kp;
    crypto_sign_seed_keypair(kp.vk_.data(), kp.sk_.data(), seed.data());
    kp.key_id_ = key_id_of(kp.vk_);
    return kp;
}

KeyPair KeyPair::generate(Rng& rng) {
    std::array<unsigned char, kSeedSize> seed{};
    rng.fill(seed.data(), seed.size());
    return from_seed(seed);
}

Signature KeyPair::sign(ByteView message) const {
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk_.data());
    sig.key_id = key_id_;
    return sig;
}

std::array<unsigned char, 32> KeyPair::encryption_secret() const {
    std::array<unsigned char, 32> out{};
    if (crypto_sign_ed25519_sk_to_curve25519(out.data(), sk_.data()) != 0) {
        throw std::runtime_error("signing key conversion failed");
    }
    return out;
}

bool verify(ByteView message, const Signature& sig, const VerificationKey& vk) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                       vk.data()) == 0;
}

std::array<unsigned char, 32> to_encryption_key(const VerificationKey& vk) {
    ensure_sodium();
    std::array<unsigned char, 32> out{};
    if (crypto_sign_ed25519_pk_to_curve25519(out.data(), vk.data()) != 0) {
        throw std::invalid_argument("invalid recipient key");
    }
    return out;
}

Bytes Envelope::serialize() const {
    Bytes out;
    out.reserve(32 + 16 + ciphertext.size());
    out.insert(out.end(), ephemeral_key.begin(), ephemeral_key.end());
    out.insert(out.end(), auth_tag.begin(), auth_tag.end());
    out.insert(out.end(), ciphertext.begin(), ciphertext.end());
    return out;
}

std::optional<Envelope> Envelope::deserialize(ByteView raw) {
    if (raw.size() < 48) return std::nullopt;
    Envelope e;
    std::memcpy(e.ephemeral_key.data(), raw.data(), 32);
    std::memcpy(e.auth_tag.data(), raw.data() + 32, 16);
    e.ciphertext.assign(raw.begin() + 48, raw.end());
    return e;
}

Envelope encrypt_for(const VerificationKey& recipient_vk, ByteView plaintext, Rng& rng) {
    ensure_sodium();
    auto rpk = to_encryption_key(recipient_vk);

    std::array<unsigned char, kSeedSize> eseed{};
    rng.fill(eseed.data(), eseed.size());
    std::array<unsigned char, crypto_box_PUBLICKEYBYTES> epk{};
    std::array<unsigned char, crypto_box_SECRETKEYBYTES> esk{};
    crypto_box_seed_keypair(epk.data(), esk.data(), eseed.data());

    auto nonce = box_nonce(epk.data(), rpk.data());
    Bytes boxed(plaintext.size() + crypto_box_MACBYTES);
    if (crypto_box_easy(boxed.data(), plaintext.data(), plaintext.size(), nonce.data(),
                        rpk.data(), esk.data()) != 0) {
        throw std::runtime_error("encryption failed");
    }

    Envelope env;
    env.ephemeral_key = epk;
    std::memcpy(env.auth_tag.data(), boxed.data(), crypto_box_MACBYTES);
    env.ciphertext.assign(boxed.begin() + crypto_box_MACBYTES, boxed.end());
    return env;
}

std::optional<Bytes> decrypt(const Envelope& envelope, const KeyPair& recipient) {
    ensure_sodium();
    auto rsk = recipient.encryption_secret();
    auto rpk = to_encryption_key(recipient.verification_key());
    auto nonce = box_nonce(envelope.ephemeral_key.data(), rpk.data());

    Bytes boxed;
    boxed.reserve(crypto_box_MACBYTES + envelope.ciphertext.size());
    boxed.insert(boxed.end(), envelope.auth_tag.begin(), envelope.auth_tag.end());
    boxed.insert(boxed.end(), envelope.ciphertext.begin(), envelope.ciphertext.end());

    Bytes plain(envelope.ciphertext.size());
    if (crypto_box_open_easy(plain.data(), boxed.data(), boxed.size(), nonce.data(),
                             envelope.ephemeral_key.data(), rsk.data()) != 0) {
        return std::nullopt;
    }
    return plain;
}

Nonce Nonce::next() const {
    Nonce n = *this;
    if (++n.lo == 0) {
        if (++n.hi == 0) throw std::overflow_error("nonce wraparound");
    }
    return n;
}

std::string Nonce::hex() const {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

Nonce Nonce::from_hex(const std::string& hex) {
    if (hex.size() != 32) throw std::invalid_argument("nonce hex must be 32 chars");
    Bytes raw = hex_decode(hex);
    Nonce n;
    for (int i = 0; i < 8; ++i) n.hi = n.hi << 8 | raw[i];
    for (int i = 8; i < 16; ++i) n.lo = n.lo << 8 | raw[i];
    return n;
}

Rng::Rng() {
    ensure_sodium();
    randombytes_buf(key_.data(), key_.size());
}

Rng::Rng(std::uint64_t seed) {
    ensure_sodium();
    unsigned char seed_bytes[8];
    for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
    crypto_hash_sha256(key_.data(), seed_bytes, sizeof(seed_bytes));
}

void Rng::fill(unsigned char* out, size_t n) {
    unsigned char nonce[8];
    std::uint64_t c = counter_++;
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<unsigned char>(c >> (8 * i));
    crypto_stream_chacha20(out, n, nonce, key_.data());
}

std::uint64_t Rng::u64() {
    unsigned char buf[8];
    fill(buf, sizeof(buf));
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | buf[i];
    return v;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("bound must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = u64();
    } while (v >= limit);
    return v % bound;
}

Nonce Rng::nonce() {
    return Nonce{u64(), u64()};
}

std::string Rng::random_hex(size_t bytes) {
    Bytes buf(bytes);
    fill(buf);
    return hex_encode(buf);
}

}  // namespace ivt::crypto
