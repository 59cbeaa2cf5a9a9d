#pragma once

#include "seda/common.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace seda::test {

inline std::filesystem::path fixture_dir() { return SEDA_FIXTURE_DIR; }
inline std::filesystem::path model_dir() { return SEDA_MODEL_DIR; }

/// name=hex lines from fixtures/vectors.txt.
inline const std::map<std::string, std::string>& vectors() {
    static const std::map<std::string, std::string> table = [] {
        std::map<std::string, std::string> t;
        std::ifstream in(fixture_dir() / "vectors.txt");
        if (!in) throw std::runtime_error("vectors.txt missing");
        for (std::string line; std::getline(in, line);) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) t[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return t;
    }();
    return table;
}

inline std::string vec(const std::string& name) { return vectors().at(name); }

/// Reference AES-128 from OpenSSL.
inline Block128 openssl_aes(const Block128& key, const Block128& block) {
    Block128 out{};
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int len = 0;
    EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    EVP_EncryptUpdate(ctx, out.data(), &len, block.data(), static_cast<int>(block.size()));
    EVP_CIPHER_CTX_free(ctx);
    return out;
}

}  // namespace seda::test
