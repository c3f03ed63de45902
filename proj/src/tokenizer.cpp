// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <cstdint>

#include "tarsim/error.hpp"
#include "tarsim/features.hpp"

namespace tarsim {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence at text[i], advancing i. Invalid input decodes
// to U+FFFD, which tokenizes as a separator.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(text[i++]);
    if (lead < 0x80) {
        return lead;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        return kReplacement;
    }
    for (int k = 0; k < extra; ++k) {
        if (i >= text.size() || (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
            return kReplacement;
        }
        cp = (cp << 6) | (static_cast<unsigned char>(text[i++]) & 0x3F);
    }
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool in_range(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') || cp == '_';
    }
    if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) {
        return true;
    }
    // Punctuation, symbol, space and control blocks.
    return !(in_range(cp, 0x80, 0xBF) || cp == 0xD7 || cp == 0xF7 || in_range(cp, 0x2000, 0x206F) ||
             in_range(cp, 0x20A0, 0x20CF) || in_range(cp, 0x2190, 0x2BFF) || in_range(cp, 0x3000, 0x303F) ||
             in_range(cp, 0xFE30, 0xFE4F) || in_range(cp, 0xFF00, 0xFF0F) || in_range(cp, 0xFF1A, 0xFF20) ||
             in_range(cp, 0xFF3B, 0xFF40) || in_range(cp, 0xFF5B, 0xFF65) || in_range(cp, 0xFFF0, 0xFFFF) ||
             in_range(cp, 0x1F000, 0x1FAFF));
}

// Simple case folding for Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp < 0x80) return cp;
    if (in_range(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
    if (in_range(cp, 0x100, 0x12F) || in_range(cp, 0x132, 0x137) || in_range(cp, 0x14A, 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (in_range(cp, 0x139, 0x148) || in_range(cp, 0x179, 0x17E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    if (in_range(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
    if (in_range(cp, 0x410, 0x42F)) return cp + 0x20;
    if (in_range(cp, 0x400, 0x40F)) return cp + 0x50;
    return cp;
}

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

} // namespace

std::string_view to_string(TokenizerKind kind) {
    return kind == TokenizerKind::kUnicodeWord ? "unicode-word" : "whitespace";
}

TokenizerKind parse_tokenizer(std::string_view s) {
    if (s == "unicode-word") return TokenizerKind::kUnicodeWord;
    if (s == "whitespace") return TokenizerKind::kWhitespace;
    throw ArgumentError("unknown tokenizer \"" + std::string(s) + "\"");
}

std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        if (kind == TokenizerKind::kWhitespace && is_ascii_space(text[i])) {
            ++i;
            flush();
            continue;
        }
        const char32_t cp = decode_utf8(text, i);
        if (kind == TokenizerKind::kUnicodeWord && !is_word_char(cp)) {
            flush();
            continue;
        }
        encode_utf8(to_lower(cp), current);
    }
    flush();
    return tokens;
}

} // namespace tarsim
