#pragma once

// Cryptographic primitives shared by the whole library: Ed25519 keypairs and
// signatures, SHA-256 digests, HMAC-SHA256, X25519 hybrid encryption, and a
// seedable deterministic RNG.  Everything here is pure or locally stateful and
// safe to use concurrently.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "ivt/common.hpp"

namespace ivt::crypto {

inline constexpr size_t kDigestSize = 32;
inline constexpr size_t kVerificationKeySize = 32;
inline constexpr size_t kSigningKeySize = 64;
inline constexpr size_t kSignatureSize = 64;
inline constexpr size_t kSeedSize = 32;

struct Digest {
    std::array<unsigned char, kDigestSize> bytes{};

    static constexpr const char* algorithm_tag = "sha-256";

    auto operator<=>(const Digest&) const = default;

    std::string hex() const { return hex_encode(bytes); }
    static Digest from_hex(const std::string& hex);  // throws on length != 32 bytes
    Bytes to_bytes() const { return Bytes(bytes.begin(), bytes.end()); }
};

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

struct Signature {
    std::array<unsigned char, kSignatureSize> bytes{};
    std::string key_id;

    auto operator<=>(const Signature&) const = default;
};

using VerificationKey = std::array<unsigned char, kVerificationKeySize>;

// key_id for a verification key: first 8 bytes of its SHA-256, hex-encoded.
std::string key_id_of(const VerificationKey& vk);

class Rng;

class KeyPair {
public:
    // Zeroed placeholder; replace before use.
    KeyPair() = default;

    // Fresh random keypair (libsodium CSPRNG).
    static KeyPair generate();
    // Deterministic keypair from a 32-byte seed; equal seeds give equal keys.
    static KeyPair from_seed(ByteView seed);  // throws on wrong seed length
    // Deterministic keypair drawn from a seedable RNG.
    static KeyPair generate(Rng& rng);

    Signature sign(ByteView message) const;

    const VerificationKey& verification_key() const { return vk_; }
    const std::string& key_id() const { return key_id_; }

    // X25519 secret derived from the signing key, for envelope decryption.
    std::array<unsigned char, 32> encryption_secret() const;

private:
    std::array<unsigned char, kSigningKeySize> sk_{};  // never serialized
    VerificationKey vk_{};
    std::string key_id_;
};

bool verify(ByteView message, const Signature& sig, const VerificationKey& vk);

// X25519 counterpart of an Ed25519 verification key, for envelope encryption.
std::array<unsigned char, 32> to_encryption_key(const VerificationKey& vk);

// Hybrid public-key encryption: ephemeral X25519 key agreement with the
// recipient's converted key, then XSalsa20-Poly1305.  Only the holder of the
// recipient signing key can open it; any bit flip fails authentication.
struct Envelope {
    std::array<unsigned char, 32> ephemeral_key{};
    Bytes ciphertext;
    std::array<unsigned char, 16> auth_tag{};

    Bytes serialize() const;
    static std::optional<Envelope> deserialize(ByteView raw);
};

Envelope encrypt_for(const VerificationKey& recipient_vk, ByteView plaintext, Rng& rng);
std::optional<Bytes> decrypt(const Envelope& envelope, const KeyPair& recipient);

// 128-bit protocol nonce with a well-defined arithmetic successor.
struct Nonce {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    auto operator<=>(const Nonce&) const = default;

    Nonce next() const;  // throws std::overflow_error on wraparound
    std::string hex() const;
    static Nonce from_hex(const std::string& hex);
};

// ChaCha20-backed deterministic byte stream.  Default-constructed instances
// seed themselves from the system CSPRNG.
class Rng {
public:
    Rng();
    explicit Rng(std::uint64_t seed);

    void fill(unsigned char* out, size_t n);
    void fill(Bytes& out) { fill(out.data(), out.size()); }
    std::uint64_t u64();
    // Uniform in [0, bound) for bound > 0.
    std::uint64_t below(std::uint64_t bound);
    Nonce nonce();
    std::string random_hex(size_t bytes);

private:
    std::array<unsigned char, 32> key_{};
    std::uint64_t counter_ = 0;
};

}  // namespace ivt::crypto
