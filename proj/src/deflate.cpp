#include "shapecx/deflate.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

#include "shapecx/error.hpp"

namespace shapecx {
namespace {

// ---------------------------------------------------------------------------
// RFC 1951 constants
// ---------------------------------------------------------------------------

constexpr int kMaxBits = 15;      // longest litlen/dist code
constexpr int kMaxClenBits = 7;   // longest code-length code
constexpr int kNumLitlen = 286;
constexpr int kNumDist = 30;
constexpr int kNumClen = 19;
constexpr int kEndOfBlock = 256;
constexpr int kMinMatch = 3;
constexpr int kMaxMatch = 258;
constexpr int kWindowSize = 32768;

const uint16_t kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,  15,  17,  19, 23, 27,
                               31, 35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258};
const uint8_t kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                               2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
const uint16_t kDistBase[30] = {1,    2,    3,    4,    5,    7,     9,     13,   17,   25,
                                33,   49,   65,   97,   129,  193,   257,   385,  513,  769,
                                1025, 1537, 2049, 3073, 4097, 6145,  8193,  12289, 16385, 24577};
const uint8_t kDistExtra[30] = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5,  6,
                                6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};
const uint8_t kClenOrder[19] = {16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15};

struct LenCodeMap {
    uint8_t code[kMaxMatch + 1];  // match length -> length symbol - 257
    LenCodeMap() {
        for (int c = 0; c < 29; ++c) {
            const int hi = (c == 28) ? 258 : kLenBase[c + 1] - 1;
            for (int l = kLenBase[c]; l <= hi; ++l) code[l] = static_cast<uint8_t>(c);
        }
    }
};
const LenCodeMap kLenCode;

int dist_code(int dist) {
    for (int c = 29; c >= 0; --c)
        if (dist >= kDistBase[c]) return c;
    return 0;
}

// ---------------------------------------------------------------------------
// bit IO (LSB-first per RFC 1951)
// ---------------------------------------------------------------------------

class BitWriter {
public:
    void put(uint32_t bits, int n) {
        buf_ |= static_cast<uint64_t>(bits) << cnt_;
        cnt_ += n;
        while (cnt_ >= 8) {
            out_.push_back(static_cast<uint8_t>(buf_));
            buf_ >>= 8;
            cnt_ -= 8;
        }
    }

    // Huffman codes enter the stream most-significant bit first.
    void put_code(uint32_t code, int n) {
        uint32_t rev = 0;
        for (int i = 0; i < n; ++i) rev |= ((code >> i) & 1u) << (n - 1 - i);
        put(rev, n);
    }

    void align() {
        if (cnt_ > 0) {
            out_.push_back(static_cast<uint8_t>(buf_));
            buf_ = 0;
            cnt_ = 0;
        }
    }

    void raw_byte(uint8_t b) { out_.push_back(b); }

    std::vector<uint8_t> take() {
        align();
        return std::move(out_);
    }

private:
    std::vector<uint8_t> out_;
    uint64_t buf_ = 0;
    int cnt_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}

    int bit() {
        if (cnt_ == 0) {
            if (pos_ >= len_)
                throw DecodeError("deflate: unexpected end of stream at byte " +
                                  std::to_string(pos_));
            buf_ = data_[pos_++];
            cnt_ = 8;
        }
        const int b = buf_ & 1;
        buf_ >>= 1;
        --cnt_;
        return b;
    }

    uint32_t bits(int n) {
        uint32_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<uint32_t>(bit()) << i;
        return v;
    }

    void align() {
        buf_ = 0;
        cnt_ = 0;
    }

    size_t pos() const { return pos_; }
    const uint8_t* raw(size_t n) {
        if (pos_ + n > len_)
            throw DecodeError("deflate: unexpected end of stream at byte " + std::to_string(len_));
        const uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }

private:
    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
    uint32_t buf_ = 0;
    int cnt_ = 0;
};

// ---------------------------------------------------------------------------
// length-limited Huffman construction (package-merge)
// ---------------------------------------------------------------------------

// Optimal code lengths bounded by max_len; zero for unused symbols.
std::vector<uint8_t> huffman_lengths(const std::vector<uint64_t>& freq, int max_len) {
    const int n = static_cast<int>(freq.size());
    std::vector<uint8_t> lengths(n, 0);
    std::vector<int> active;
    for (int i = 0; i < n; ++i)
        if (freq[i] > 0) active.push_back(i);
    if (active.empty()) return lengths;
    if (active.size() == 1) {
        lengths[active[0]] = 1;
        return lengths;
    }

    struct Item {
        uint64_t weight;
        std::vector<int> leaves;  // symbol per contained leaf
    };
    std::vector<Item> leaves;
    leaves.reserve(active.size());
    for (int s : active) leaves.push_back({freq[s], {s}});
    std::stable_sort(leaves.begin(), leaves.end(),
                     [](const Item& a, const Item& b) { return a.weight < b.weight; });

    std::vector<Item> prev;  // working list at the deeper level
    for (int level = 0; level < max_len; ++level) {
        std::vector<Item> packages;
        for (size_t i = 0; i + 1 < prev.size(); i += 2) {
            Item p;
            p.weight = prev[i].weight + prev[i + 1].weight;
            p.leaves = prev[i].leaves;
            p.leaves.insert(p.leaves.end(), prev[i + 1].leaves.begin(), prev[i + 1].leaves.end());
            packages.push_back(std::move(p));
        }
        std::vector<Item> merged;
        merged.reserve(leaves.size() + packages.size());
        std::merge(leaves.begin(), leaves.end(), packages.begin(), packages.end(),
                   std::back_inserter(merged),
                   [](const Item& a, const Item& b) { return a.weight < b.weight; });
        prev = std::move(merged);
    }

    const size_t take = 2 * (active.size() - 1);
    for (size_t i = 0; i < take && i < prev.size(); ++i)
        for (int s : prev[i].leaves) ++lengths[s];
    return lengths;
}

// Canonical codes from lengths (RFC 1951 section 3.2.2).
std::vector<uint16_t> canonical_codes(const std::vector<uint8_t>& lengths) {
    std::array<int, kMaxBits + 1> bl_count{};
    for (uint8_t l : lengths) ++bl_count[l];
    bl_count[0] = 0;
    std::array<uint16_t, kMaxBits + 2> next_code{};
    uint16_t code = 0;
    for (int b = 1; b <= kMaxBits; ++b) {
        code = static_cast<uint16_t>((code + bl_count[b - 1]) << 1);
        next_code[b] = code;
    }
    std::vector<uint16_t> codes(lengths.size(), 0);
    for (size_t i = 0; i < lengths.size(); ++i)
        if (lengths[i]) codes[i] = next_code[lengths[i]]++;
    return codes;
}

// ---------------------------------------------------------------------------
// LZ77 tokenizer (hash chains, lazy matching)
// ---------------------------------------------------------------------------

struct Token {
    uint16_t len;   // 0 => literal
    uint16_t dist;
    uint8_t lit;
};

constexpr int kHashBits = 15;
constexpr int kHashSize = 1 << kHashBits;
constexpr int kMaxChain = 4096;  // match-effort bound
constexpr int kNiceLen = 160;    // stop searching once a match this good is found

uint32_t hash3(const uint8_t* p) {
    const uint32_t v = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                       (static_cast<uint32_t>(p[2]) << 16);
    return (v * 2654435761u) >> (32 - kHashBits);
}

class Matcher {
public:
    Matcher(const uint8_t* data, size_t len)
        : data_(data), len_(len), head_(kHashSize, -1), prev_(len, -1) {}

    void insert(size_t pos) {
        if (pos + kMinMatch > len_) return;
        const uint32_t h = hash3(data_ + pos);
        prev_[pos] = head_[h];
        head_[h] = static_cast<int64_t>(pos);
    }

    // Longest match at pos, at least min_len+1 long, else len 0.
    std::pair<int, int> find(size_t pos, int min_len) const {
        int best_len = min_len, best_dist = 0;
        if (pos + kMinMatch > len_) return {0, 0};
        const int limit = static_cast<int>(std::min<size_t>(kMaxMatch, len_ - pos));
        if (limit <= best_len) return {0, 0};
        int64_t cand = head_[hash3(data_ + pos)];
        int chain = kMaxChain;
        while (cand >= 0 && chain-- > 0) {
            const size_t c = static_cast<size_t>(cand);
            if (pos - c > kWindowSize) break;
            if (c != pos && data_[c + best_len] == data_[pos + best_len]) {
                int l = 0;
                while (l < limit && data_[c + l] == data_[pos + l]) ++l;
                if (l > best_len) {
                    best_len = l;
                    best_dist = static_cast<int>(pos - c);
                    if (l >= limit || l >= kNiceLen) break;
                }
            }
            cand = prev_[c];
        }
        return best_dist ? std::make_pair(best_len, best_dist) : std::make_pair(0, 0);
    }

private:
    const uint8_t* data_;
    size_t len_;
    std::vector<int64_t> head_;
    std::vector<int64_t> prev_;
};

std::vector<Token> tokenize(const uint8_t* data, size_t len) {
    std::vector<Token> tokens;
    tokens.reserve(len / 2 + 16);
    Matcher matcher(data, len);
    size_t pos = 0;
    while (pos < len) {
        auto [mlen, mdist] = matcher.find(pos, kMinMatch - 1);
        matcher.insert(pos);
        // lazy step: a strictly longer match one byte later wins
        if (mlen >= kMinMatch && mlen < kNiceLen && pos + 1 < len &&
            matcher.find(pos + 1, mlen).first > mlen) {
            tokens.push_back({0, 0, data[pos]});
            ++pos;
            continue;
        }
        if (mlen >= kMinMatch) {
            tokens.push_back({static_cast<uint16_t>(mlen), static_cast<uint16_t>(mdist), 0});
            for (size_t i = pos + 1; i < pos + static_cast<size_t>(mlen); ++i) matcher.insert(i);
            pos += static_cast<size_t>(mlen);
        } else {
            tokens.push_back({0, 0, data[pos]});
            ++pos;
        }
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// block encoding
// ---------------------------------------------------------------------------

struct CodeSet {
    std::vector<uint8_t> litlen_len, dist_len;
    std::vector<uint16_t> litlen_code, dist_code;
};

CodeSet fixed_codes() {
    CodeSet cs;
    cs.litlen_len.assign(288, 8);
    for (int i = 144; i <= 255; ++i) cs.litlen_len[i] = 9;
    for (int i = 256; i <= 279; ++i) cs.litlen_len[i] = 7;
    cs.dist_len.assign(30, 5);
    cs.litlen_code = canonical_codes(cs.litlen_len);
    cs.dist_code = canonical_codes(cs.dist_len);
    return cs;
}

void emit_tokens(BitWriter& bw, const std::vector<Token>& tokens, size_t begin, size_t end,
                 const CodeSet& cs) {
    for (size_t i = begin; i < end; ++i) {
        const Token& t = tokens[i];
        if (t.len == 0) {
            bw.put_code(cs.litlen_code[t.lit], cs.litlen_len[t.lit]);
        } else {
            const int lc = kLenCode.code[t.len];
            bw.put_code(cs.litlen_code[257 + lc], cs.litlen_len[257 + lc]);
            bw.put(static_cast<uint32_t>(t.len - kLenBase[lc]), kLenExtra[lc]);
            const int dc = dist_code(t.dist);
            bw.put_code(cs.dist_code[dc], cs.dist_len[dc]);
            bw.put(static_cast<uint32_t>(t.dist - kDistBase[dc]), kDistExtra[dc]);
        }
    }
    bw.put_code(cs.litlen_code[kEndOfBlock], cs.litlen_len[kEndOfBlock]);
}

// RLE of the combined litlen+dist length arrays, as (symbol, extra, extra_bits).
struct ClenRun {
    uint8_t sym;
    uint8_t extra;
    uint8_t extra_bits;
};

std::vector<ClenRun> rle_code_lengths(const std::vector<uint8_t>& lens) {
    std::vector<ClenRun> runs;
    size_t i = 0;
    while (i < lens.size()) {
        const uint8_t v = lens[i];
        size_t j = i;
        while (j < lens.size() && lens[j] == v) ++j;
        size_t run = j - i;
        if (v == 0) {
            while (run >= 11) {
                const size_t take = std::min<size_t>(run, 138);
                runs.push_back({18, static_cast<uint8_t>(take - 11), 7});
                run -= take;
            }
            if (run >= 3) {
                runs.push_back({17, static_cast<uint8_t>(run - 3), 3});
                run = 0;
            }
            for (; run > 0; --run) runs.push_back({0, 0, 0});
        } else {
            runs.push_back({v, 0, 0});
            --run;
            while (run >= 3) {
                const size_t take = std::min<size_t>(run, 6);
                runs.push_back({16, static_cast<uint8_t>(take - 3), 2});
                run -= take;
            }
            for (; run > 0; --run) runs.push_back({v, 0, 0});
        }
        i = j;
    }
    return runs;
}

struct DynamicPlan {
    CodeSet cs;
    std::vector<ClenRun> runs;
    std::vector<uint8_t> clen_len;
    std::vector<uint16_t> clen_code;
    int hlit = 0, hdist = 0, hclen = 0;
    uint64_t header_bits = 0;
};

DynamicPlan plan_dynamic(const std::vector<uint64_t>& lit_freq,
                         const std::vector<uint64_t>& dist_freq) {
    DynamicPlan p;
    p.cs.litlen_len = huffman_lengths(lit_freq, kMaxBits);
    p.cs.dist_len = huffman_lengths(dist_freq, kMaxBits);
    p.cs.litlen_len.resize(kNumLitlen);
    p.cs.dist_len.resize(kNumDist);

    int nlit = kNumLitlen;
    while (nlit > 257 && p.cs.litlen_len[nlit - 1] == 0) --nlit;
    int ndist = kNumDist;
    while (ndist > 1 && p.cs.dist_len[ndist - 1] == 0) --ndist;
    p.hlit = nlit - 257;
    p.hdist = ndist - 1;

    std::vector<uint8_t> all(p.cs.litlen_len.begin(), p.cs.litlen_len.begin() + nlit);
    all.insert(all.end(), p.cs.dist_len.begin(), p.cs.dist_len.begin() + ndist);
    p.runs = rle_code_lengths(all);

    std::vector<uint64_t> clen_freq(kNumClen, 0);
    for (const auto& r : p.runs) ++clen_freq[r.sym];
    p.clen_len = huffman_lengths(clen_freq, kMaxClenBits);
    p.clen_len.resize(kNumClen);
    p.clen_code = canonical_codes(p.clen_len);

    int nclen = kNumClen;
    while (nclen > 4 && p.clen_len[kClenOrder[nclen - 1]] == 0) --nclen;
    p.hclen = nclen - 4;

    p.cs.litlen_code = canonical_codes(p.cs.litlen_len);
    p.cs.dist_code = canonical_codes(p.cs.dist_len);

    p.header_bits = 5 + 5 + 4 + static_cast<uint64_t>(nclen) * 3;
    for (const auto& r : p.runs) p.header_bits += p.clen_len[r.sym] + r.extra_bits;
    return p;
}

uint64_t token_cost_bits(const std::vector<uint64_t>& lit_freq,
                         const std::vector<uint64_t>& dist_freq, const CodeSet& cs) {
    uint64_t bits = 0;
    for (int s = 0; s < kNumLitlen; ++s)
        if (lit_freq[s]) {
            if (cs.litlen_len[s] == 0) return UINT64_MAX;  // not encodable
            bits += lit_freq[s] * cs.litlen_len[s];
            if (s > 256) bits += lit_freq[s] * kLenExtra[s - 257];
        }
    for (int s = 0; s < kNumDist; ++s)
        if (dist_freq[s]) {
            if (cs.dist_len[s] == 0) return UINT64_MAX;
            bits += dist_freq[s] * (cs.dist_len[s] + kDistExtra[s]);
        }
    return bits;
}

void emit_stored(BitWriter& bw, const uint8_t* data, size_t len, bool final_block) {
    size_t off = 0;
    do {
        const size_t chunk = std::min<size_t>(len - off, 65535);
        const bool last = final_block && off + chunk == len;
        bw.put(last ? 1 : 0, 1);
        bw.put(0, 2);  // BTYPE 00
        bw.align();
        bw.raw_byte(static_cast<uint8_t>(chunk & 0xff));
        bw.raw_byte(static_cast<uint8_t>(chunk >> 8));
        bw.raw_byte(static_cast<uint8_t>(~chunk & 0xff));
        bw.raw_byte(static_cast<uint8_t>((~chunk >> 8) & 0xff));
        for (size_t i = 0; i < chunk; ++i) bw.raw_byte(data[off + i]);
        off += chunk;
    } while (off < len);
}

// Encode one run of tokens covering data[data_begin, data_end).
void emit_block(BitWriter& bw, const uint8_t* data, size_t data_begin, size_t data_end,
                const std::vector<Token>& tokens, size_t tok_begin, size_t tok_end,
                bool final_block) {
    std::vector<uint64_t> lit_freq(kNumLitlen, 0), dist_freq(kNumDist, 0);
    for (size_t i = tok_begin; i < tok_end; ++i) {
        const Token& t = tokens[i];
        if (t.len == 0) {
            ++lit_freq[t.lit];
        } else {
            ++lit_freq[257 + kLenCode.code[t.len]];
            ++dist_freq[dist_code(t.dist)];
        }
    }
    ++lit_freq[kEndOfBlock];

    DynamicPlan dyn = plan_dynamic(lit_freq, dist_freq);
    const uint64_t dyn_bits = 3 + dyn.header_bits + token_cost_bits(lit_freq, dist_freq, dyn.cs);
    static const CodeSet kFixed = fixed_codes();
    const uint64_t fixed_body = token_cost_bits(lit_freq, dist_freq, kFixed);
    const uint64_t fixed_bits = fixed_body == UINT64_MAX ? UINT64_MAX : 3 + fixed_body;
    const size_t data_len = data_end - data_begin;
    const uint64_t stored_bits = 8 * (5 * (data_len / 65535 + 1) + data_len) + 7;

    if (stored_bits < dyn_bits && stored_bits < fixed_bits) {
        emit_stored(bw, data + data_begin, data_len, final_block);
        return;
    }
    if (fixed_bits <= dyn_bits) {
        bw.put(final_block ? 1 : 0, 1);
        bw.put(1, 2);  // BTYPE 01
        emit_tokens(bw, tokens, tok_begin, tok_end, kFixed);
        return;
    }
    bw.put(final_block ? 1 : 0, 1);
    bw.put(2, 2);  // BTYPE 10
    bw.put(static_cast<uint32_t>(dyn.hlit), 5);
    bw.put(static_cast<uint32_t>(dyn.hdist), 5);
    bw.put(static_cast<uint32_t>(dyn.hclen), 4);
    for (int i = 0; i < dyn.hclen + 4; ++i) bw.put(dyn.clen_len[kClenOrder[i]], 3);
    for (const auto& r : dyn.runs) {
        bw.put_code(dyn.clen_code[r.sym], dyn.clen_len[r.sym]);
        if (r.extra_bits) bw.put(r.extra, r.extra_bits);
    }
    emit_tokens(bw, tokens, tok_begin, tok_end, dyn.cs);
}

// ---------------------------------------------------------------------------
// decoder tables
// ---------------------------------------------------------------------------

struct DecodeTable {
    std::array<uint16_t, kMaxBits + 1> count{};  // codes per length
    std::vector<uint16_t> symbols;               // canonical order

    // Build from lengths; rejects over-subscribed codes.
    void build(const std::vector<uint8_t>& lengths, size_t at_byte) {
        count.fill(0);
        for (uint8_t l : lengths)
            if (l) ++count[l];
        int64_t left = 1;
        for (int b = 1; b <= kMaxBits; ++b) {
            left = (left << 1) - count[b];
            if (left < 0)
                throw DecodeError("deflate: over-subscribed code set at byte " +
                                  std::to_string(at_byte));
        }
        std::array<uint16_t, kMaxBits + 2> offs{};
        for (int b = 1; b <= kMaxBits; ++b) offs[b + 1] = static_cast<uint16_t>(offs[b] + count[b]);
        symbols.assign(lengths.size(), 0);
        for (size_t s = 0; s < lengths.size(); ++s)
            if (lengths[s]) symbols[offs[lengths[s]]++] = static_cast<uint16_t>(s);
    }

    int decode(BitReader& br) const {
        int code = 0, first = 0, index = 0;
        for (int len = 1; len <= kMaxBits; ++len) {
            code |= br.bit();
            const int n = count[len];
            if (code - first < n) return symbols[index + (code - first)];
            index += n;
            first = (first + n) << 1;
            code <<= 1;
        }
        throw DecodeError("deflate: invalid code at byte " + std::to_string(br.pos()));
    }
};

void read_dynamic_tables(BitReader& br, DecodeTable& litlen, DecodeTable& dist) {
    const int hlit = static_cast<int>(br.bits(5)) + 257;
    const int hdist = static_cast<int>(br.bits(5)) + 1;
    const int hclen = static_cast<int>(br.bits(4)) + 4;
    if (hlit > kNumLitlen)
        throw DecodeError("deflate: bad HLIT at byte " + std::to_string(br.pos()));
    std::vector<uint8_t> clen_len(kNumClen, 0);
    for (int i = 0; i < hclen; ++i) clen_len[kClenOrder[i]] = static_cast<uint8_t>(br.bits(3));
    DecodeTable clen;
    clen.build(clen_len, br.pos());

    std::vector<uint8_t> lens;
    lens.reserve(static_cast<size_t>(hlit + hdist));
    while (static_cast<int>(lens.size()) < hlit + hdist) {
        const int sym = clen.decode(br);
        if (sym < 16) {
            lens.push_back(static_cast<uint8_t>(sym));
        } else if (sym == 16) {
            if (lens.empty())
                throw DecodeError("deflate: repeat with no previous length at byte " +
                                  std::to_string(br.pos()));
            const int rep = 3 + static_cast<int>(br.bits(2));
            lens.insert(lens.end(), static_cast<size_t>(rep), lens.back());
        } else if (sym == 17) {
            const int rep = 3 + static_cast<int>(br.bits(3));
            lens.insert(lens.end(), static_cast<size_t>(rep), 0);
        } else {
            const int rep = 11 + static_cast<int>(br.bits(7));
            lens.insert(lens.end(), static_cast<size_t>(rep), 0);
        }
    }
    if (static_cast<int>(lens.size()) != hlit + hdist)
        throw DecodeError("deflate: code length overflow at byte " + std::to_string(br.pos()));
    if (lens[kEndOfBlock] == 0)
        throw DecodeError("deflate: missing end-of-block code at byte " + std::to_string(br.pos()));
    std::vector<uint8_t> ll(lens.begin(), lens.begin() + hlit);
    std::vector<uint8_t> dl(lens.begin() + hlit, lens.end());
    litlen.build(ll, br.pos());
    dist.build(dl, br.pos());
}

void inflate_block(BitReader& br, const DecodeTable& litlen, const DecodeTable& dist,
                   std::vector<uint8_t>& out) {
    for (;;) {
        const int sym = litlen.decode(br);
        if (sym < 256) {
            out.push_back(static_cast<uint8_t>(sym));
        } else if (sym == kEndOfBlock) {
            return;
        } else {
            if (sym - 257 >= 29)
                throw DecodeError("deflate: invalid length symbol at byte " +
                                  std::to_string(br.pos()));
            const int len =
                kLenBase[sym - 257] + static_cast<int>(br.bits(kLenExtra[sym - 257]));
            const int dsym = dist.decode(br);
            if (dsym >= kNumDist)
                throw DecodeError("deflate: invalid distance symbol at byte " +
                                  std::to_string(br.pos()));
            const size_t d =
                kDistBase[dsym] + static_cast<size_t>(br.bits(kDistExtra[dsym]));
            if (d > out.size())
                throw DecodeError("deflate: distance exceeds output at byte " +
                                  std::to_string(br.pos()));
            const size_t start = out.size() - d;
            for (int i = 0; i < len; ++i) out.push_back(out[start + static_cast<size_t>(i)]);
        }
    }
}

} // namespace

std::vector<uint8_t> deflate(const uint8_t* data, size_t len) {
    BitWriter bw;
    if (len == 0) {
        // a final fixed-Huffman block containing only end-of-block
        static const CodeSet kFixed = fixed_codes();
        bw.put(1, 1);
        bw.put(1, 2);
        bw.put_code(kFixed.litlen_code[kEndOfBlock], kFixed.litlen_len[kEndOfBlock]);
        return bw.take();
    }

    const std::vector<Token> tokens = tokenize(data, len);

    // one tree per block; blocks bounded so the Huffman stats stay local
    constexpr size_t kTokensPerBlock = 1 << 16;
    size_t tok_begin = 0, data_begin = 0;
    while (tok_begin < tokens.size()) {
        const size_t tok_end = std::min(tokens.size(), tok_begin + kTokensPerBlock);
        size_t data_end = data_begin;
        for (size_t i = tok_begin; i < tok_end; ++i)
            data_end += tokens[i].len ? tokens[i].len : 1;
        emit_block(bw, data, data_begin, data_end, tokens, tok_begin, tok_end,
                   tok_end == tokens.size());
        tok_begin = tok_end;
        data_begin = data_end;
    }
    return bw.take();
}

std::vector<uint8_t> deflate(const std::vector<uint8_t>& data) {
    return deflate(data.data(), data.size());
}

std::vector<uint8_t> inflate(const uint8_t* data, size_t len) {
    BitReader br(data, len);
    std::vector<uint8_t> out;
    static const CodeSet kFixed = fixed_codes();
    static DecodeTable fixed_litlen, fixed_dist;
    static const bool init_fixed = [] {
        fixed_litlen.build(kFixed.litlen_len, 0);
        fixed_dist.build(kFixed.dist_len, 0);
        return true;
    }();
    (void)init_fixed;

    for (;;) {
        const int final_block = br.bit();
        const uint32_t btype = br.bits(2);
        if (btype == 0) {
            br.align();
            const uint8_t* hdr = br.raw(4);
            const uint32_t blen = static_cast<uint32_t>(hdr[0]) | (static_cast<uint32_t>(hdr[1]) << 8);
            const uint32_t nlen = static_cast<uint32_t>(hdr[2]) | (static_cast<uint32_t>(hdr[3]) << 8);
            if ((blen ^ nlen) != 0xffff)
                throw DecodeError("deflate: stored block length check failed at byte " +
                                  std::to_string(br.pos() - 2));
            const uint8_t* p = br.raw(blen);
            out.insert(out.end(), p, p + blen);
        } else if (btype == 1) {
            inflate_block(br, fixed_litlen, fixed_dist, out);
        } else if (btype == 2) {
            DecodeTable litlen, dist;
            read_dynamic_tables(br, litlen, dist);
            inflate_block(br, litlen, dist, out);
        } else {
            throw DecodeError("deflate: reserved block type at byte " + std::to_string(br.pos()));
        }
        if (final_block) break;
    }
    return out;
}

std::vector<uint8_t> inflate(const std::vector<uint8_t>& data) {
    return inflate(data.data(), data.size());
}

std::vector<uint8_t> zlib_compress(const uint8_t* data, size_t len) {
    std::vector<uint8_t> out;
    out.push_back(0x78);  // deflate, 32K window
    out.push_back(0xda);  // max-compression hint, FCHECK valid
    std::vector<uint8_t> body = deflate(data, len);
    out.insert(out.end(), body.begin(), body.end());
    const uint32_t a = adler32(data, len);
    out.push_back(static_cast<uint8_t>(a >> 24));
    out.push_back(static_cast<uint8_t>(a >> 16));
    out.push_back(static_cast<uint8_t>(a >> 8));
    out.push_back(static_cast<uint8_t>(a));
    return out;
}

std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t len) {
    if (len < 6) throw DecodeError("zlib: stream shorter than header at byte 0");
    const uint8_t cmf = data[0], flg = data[1];
    if ((cmf & 0x0f) != 8)
        throw DecodeError("zlib: unsupported compression method at byte 0");
    if ((static_cast<unsigned>(cmf) * 256 + flg) % 31 != 0)
        throw DecodeError("zlib: header check failed at byte 1");
    if (flg & 0x20) throw DecodeError("zlib: preset dictionaries unsupported at byte 1");
    std::vector<uint8_t> out = inflate(data + 2, len - 6);
    const uint32_t want = (static_cast<uint32_t>(data[len - 4]) << 24) |
                          (static_cast<uint32_t>(data[len - 3]) << 16) |
                          (static_cast<uint32_t>(data[len - 2]) << 8) |
                          static_cast<uint32_t>(data[len - 1]);
    if (adler32(out.data(), out.size()) != want)
        throw DecodeError("zlib: adler32 mismatch at byte " + std::to_string(len - 4));
    return out;
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = seed ^ 0xffffffffu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

uint32_t adler32(const uint8_t* data, size_t len) {
    uint32_t a = 1, b = 0;
    size_t i = 0;
    while (i < len) {
        const size_t chunk = std::min<size_t>(len - i, 5552);
        for (size_t j = 0; j < chunk; ++j) {
            a += data[i + j];
            b += a;
        }
        a %= 65521;
        b %= 65521;
        i += chunk;
    }
    return (b << 16) | a;
}

} // namespace shapecx
