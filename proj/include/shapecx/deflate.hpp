#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace shapecx {

/// Compress to a raw RFC 1951 stream. Single effort setting: exhaustive-ish
/// match search with lazy evaluation and per-block choice among stored,
/// fixed-Huffman and dynamic-Huffman encodings (maximum-compression
/// semantics). Deterministic: equal input gives equal output bytes.
std::vector<uint8_t> deflate(const uint8_t* data, size_t len);
std::vector<uint8_t> deflate(const std::vector<uint8_t>& data);

/// Decompress a raw RFC 1951 stream. Throws DecodeError naming the byte
/// offset on malformed or truncated input.
std::vector<uint8_t> inflate(const uint8_t* data, size_t len);
std::vector<uint8_t> inflate(const std::vector<uint8_t>& data);

/// RFC 1950 wrapper around deflate/inflate (used by the PNG codec).
std::vector<uint8_t> zlib_compress(const uint8_t* data, size_t len);
std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t len);

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);
uint32_t adler32(const uint8_t* data, size_t len);

} // namespace shapecx
