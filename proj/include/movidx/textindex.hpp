#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movidx/document.hpp"
#include "movidx/error.hpp"

namespace movidx {

// ─── Tokenization ────────────────────────────────────────────────

// Terms are maximal runs of ASCII letters and digits, lowercased.
// Everything else — punctuation, whitespace, non-ASCII bytes — separates.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current += static_cast<char>(c);
        } else if (c >= 'A' && c <= 'Z') {
            current += static_cast<char>(c - 'A' + 'a');
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

// ─── Inverted index ──────────────────────────────────────────────

struct Posting {
    std::string doc_id;
    std::int64_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct InvertedIndex {
    // Term → postings sorted by doc id; map keys give lexicographic term order.
    std::map<std::string, std::vector<Posting>> terms;
    std::size_t doc_count = 0;
    std::int64_t total_terms = 0;

    friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;
};

// Documents may arrive in any order; duplicate ids are rejected. Documents
// whose text yields no terms still count toward doc_count.
inline InvertedIndex build_index(const std::vector<Document>& docs) {
    InvertedIndex index;
    index.doc_count = docs.size();
    std::set<std::string> seen;
    std::map<std::string, std::map<std::string, std::int64_t>> acc;  // term → id → tf
    for (const auto& doc : docs) {
        if (!seen.insert(doc.id).second) {
            throw ValidationError("duplicate document id '" + doc.id + "'");
        }
        for (auto& term : tokenize(doc.text)) {
            ++acc[std::move(term)][doc.id];
            ++index.total_terms;
        }
    }
    for (auto& [term, by_doc] : acc) {
        std::vector<Posting>& postings = index.terms[term];
        postings.reserve(by_doc.size());
        for (auto& [id, tf] : by_doc) {
            postings.push_back({id, tf});
        }
    }
    return index;
}

// ─── Index JSON round-trip ───────────────────────────────────────
//
// {"doc_count": N, "total_terms": N, "terms": {term: [[doc_id, tf], ...]}}
// Terms appear lexicographically, postings in ascending doc-id order;
// serialization of a loaded index reproduces the input byte for byte.

inline nlohmann::json index_to_json(const InvertedIndex& index) {
    nlohmann::json j;
    j["doc_count"] = index.doc_count;
    j["total_terms"] = index.total_terms;
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [term, postings] : index.terms) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : postings) {
            arr.push_back(nlohmann::json::array({p.doc_id, p.tf}));
        }
        terms[term] = std::move(arr);
    }
    j["terms"] = std::move(terms);
    return j;
}

inline InvertedIndex index_from_json(const nlohmann::json& j) {
    InvertedIndex index;
    try {
        index.doc_count = j.at("doc_count").get<std::size_t>();
        index.total_terms = j.at("total_terms").get<std::int64_t>();
        for (const auto& [term, arr] : j.at("terms").items()) {
            std::vector<Posting>& postings = index.terms[term];
            for (const auto& entry : arr) {
                if (!entry.is_array() || entry.size() != 2) {
                    throw ParseError("term '" + term + "': posting is not an [id, tf] pair");
                }
                Posting p{entry[0].get<std::string>(), entry[1].get<std::int64_t>()};
                if (p.tf < 1) {
                    throw ParseError("term '" + term + "': non-positive frequency for '" +
                                     p.doc_id + "'");
                }
                if (!postings.empty() && postings.back().doc_id >= p.doc_id) {
                    throw ParseError("term '" + term + "': postings out of doc-id order");
                }
                postings.push_back(std::move(p));
            }
            if (postings.empty()) {
                throw ParseError("term '" + term + "' has no postings");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("index json: ") + e.what());
    }
    return index;
}

inline std::string serialize_index(const InvertedIndex& index) {
    return index_to_json(index).dump(2) + "\n";
}

inline InvertedIndex deserialize_index(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("index json: ") + e.what());
    }
    return index_from_json(j);
}

inline InvertedIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_index(buf.str());
}

inline void save_index(const InvertedIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << serialize_index(index);
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ─── Query syntax ────────────────────────────────────────────────
//
//   query  := or
//   or     := and (OR and)*
//   and    := unary (AND? unary)*        adjacency is an implicit AND
//   unary  := NOT unary | primary
//   primary := '(' or ')' | word
//
// Keywords are case-insensitive. A word is tokenized like document text;
// one that splits into several terms becomes an AND chain. Queries that
// can only say what documents must NOT contain match an unbounded set
// and are rejected.

struct QueryNode {
    enum class Kind { Term, And, Or, Not };

    Kind kind = Kind::Term;
    std::string term;                  // Kind::Term
    std::unique_ptr<QueryNode> left;   // And/Or/Not (Not uses left only)
    std::unique_ptr<QueryNode> right;  // And/Or
};

namespace detail {

inline std::unique_ptr<QueryNode> make_term(std::string term) {
    auto node = std::make_unique<QueryNode>();
    node->kind = QueryNode::Kind::Term;
    node->term = std::move(term);
    return node;
}

inline std::unique_ptr<QueryNode> make_binary(QueryNode::Kind kind,
                                              std::unique_ptr<QueryNode> left,
                                              std::unique_ptr<QueryNode> right) {
    auto node = std::make_unique<QueryNode>();
    node->kind = kind;
    node->left = std::move(left);
    node->right = std::move(right);
    return node;
}

inline std::unique_ptr<QueryNode> make_not(std::unique_ptr<QueryNode> child) {
    auto node = std::make_unique<QueryNode>();
    node->kind = QueryNode::Kind::Not;
    node->left = std::move(child);
    return node;
}

// True when the node's match set is a complement set — bounded only by
// what documents must not contain.
inline bool unbounded_matches(const QueryNode& node) {
    switch (node.kind) {
        case QueryNode::Kind::Term: return false;
        case QueryNode::Kind::Not: return !unbounded_matches(*node.left);
        case QueryNode::Kind::And:
            return unbounded_matches(*node.left) && unbounded_matches(*node.right);
        case QueryNode::Kind::Or:
            return unbounded_matches(*node.left) || unbounded_matches(*node.right);
    }
    return false;
}

// Terms reachable through an even number of NOTs; these are the terms a
// matching document can actually contain, and the ones scoring counts.
inline void collect_positive_terms(const QueryNode& node, bool negated,
                                   std::set<std::string>& out) {
    switch (node.kind) {
        case QueryNode::Kind::Term:
            if (!negated) out.insert(node.term);
            break;
        case QueryNode::Kind::Not:
            collect_positive_terms(*node.left, !negated, out);
            break;
        case QueryNode::Kind::And:
        case QueryNode::Kind::Or:
            collect_positive_terms(*node.left, negated, out);
            collect_positive_terms(*node.right, negated, out);
            break;
    }
}

struct QueryLexer {
    enum class TokenKind { Word, And, Or, Not, LParen, RParen, End };
    struct Token {
        TokenKind kind;
        std::string text;
    };

    explicit QueryLexer(const std::string& text) {
        std::string raw;
        auto flush = [&] {
            if (raw.empty()) return;
            if (iequals_keyword(raw, "and")) {
                tokens.push_back({TokenKind::And, raw});
            } else if (iequals_keyword(raw, "or")) {
                tokens.push_back({TokenKind::Or, raw});
            } else if (iequals_keyword(raw, "not")) {
                tokens.push_back({TokenKind::Not, raw});
            } else {
                tokens.push_back({TokenKind::Word, raw});
            }
            raw.clear();
        };
        for (char c : text) {
            if (c == '(') {
                flush();
                tokens.push_back({TokenKind::LParen, "("});
            } else if (c == ')') {
                flush();
                tokens.push_back({TokenKind::RParen, ")"});
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                       c == '\f' || c == '\v') {
                flush();
            } else {
                raw += c;
            }
        }
        flush();
        tokens.push_back({TokenKind::End, ""});
    }

    static bool iequals_keyword(const std::string& raw, const char* keyword) {
        std::size_t n = 0;
        while (keyword[n] != '\0') ++n;
        if (raw.size() != n) return false;
        for (std::size_t i = 0; i < n; ++i) {
            char c = raw[i];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c != keyword[i]) return false;
        }
        return true;
    }

    const Token& peek() const { return tokens[pos]; }
    Token next() { return tokens[pos++]; }

    std::vector<Token> tokens;
    std::size_t pos = 0;
};

class QueryParser {
public:
    explicit QueryParser(const std::string& text) : lexer_(text) {}

    std::unique_ptr<QueryNode> parse() {
        auto node = parse_or();
        if (lexer_.peek().kind != QueryLexer::TokenKind::End) {
            throw ParseError("query: unexpected '" + lexer_.peek().text + "'");
        }
        return node;
    }

private:
    using TokenKind = QueryLexer::TokenKind;

    std::unique_ptr<QueryNode> parse_or() {
        auto node = parse_and();
        while (lexer_.peek().kind == TokenKind::Or) {
            lexer_.next();
            node = make_binary(QueryNode::Kind::Or, std::move(node), parse_and());
        }
        return node;
    }

    std::unique_ptr<QueryNode> parse_and() {
        auto node = parse_unary();
        while (true) {
            TokenKind kind = lexer_.peek().kind;
            if (kind == TokenKind::And) {
                lexer_.next();
                node = make_binary(QueryNode::Kind::And, std::move(node), parse_unary());
            } else if (kind == TokenKind::Word || kind == TokenKind::Not ||
                       kind == TokenKind::LParen) {
                node = make_binary(QueryNode::Kind::And, std::move(node), parse_unary());
            } else {
                return node;
            }
        }
    }

    std::unique_ptr<QueryNode> parse_unary() {
        if (lexer_.peek().kind == TokenKind::Not) {
            lexer_.next();
            return make_not(parse_unary());
        }
        return parse_primary();
    }

    std::unique_ptr<QueryNode> parse_primary() {
        auto token = lexer_.next();
        switch (token.kind) {
            case TokenKind::LParen: {
                auto node = parse_or();
                if (lexer_.peek().kind != TokenKind::RParen) {
                    throw ParseError("query: missing ')'");
                }
                lexer_.next();
                return node;
            }
            case TokenKind::Word: {
                auto terms = tokenize(token.text);
                if (terms.empty()) {
                    throw ParseError("query: '" + token.text + "' has no indexable characters");
                }
                auto node = make_term(std::move(terms[0]));
                for (std::size_t i = 1; i < terms.size(); ++i) {
                    node = make_binary(QueryNode::Kind::And, std::move(node),
                                       make_term(std::move(terms[i])));
                }
                return node;
            }
            case TokenKind::End:
                throw ParseError("query: expected a term");
            default:
                throw ParseError("query: unexpected '" + token.text + "'");
        }
    }

    QueryLexer lexer_;
};

}  // namespace detail

class QueryAst {
public:
    explicit QueryAst(const std::string& text) {
        root_ = detail::QueryParser(text).parse();
        if (detail::unbounded_matches(*root_)) {
            throw ParseError("query: matches an unbounded set; "
                             "add at least one non-negated term");
        }
        std::set<std::string> positives;
        detail::collect_positive_terms(*root_, false, positives);
        positive_terms_.assign(positives.begin(), positives.end());
    }

    const QueryNode& root() const { return *root_; }
    // Sorted, deduplicated terms with positive polarity; scoring counts these.
    const std::vector<std::string>& positive_terms() const { return positive_terms_; }

private:
    std::unique_ptr<QueryNode> root_;
    std::vector<std::string> positive_terms_;
};

inline QueryAst parse_query(const std::string& text) { return QueryAst(text); }

// Lisp-style rendering, mainly for tests: (and ohm (not shock)).
inline std::string query_to_string(const QueryNode& node) {
    switch (node.kind) {
        case QueryNode::Kind::Term: return node.term;
        case QueryNode::Kind::Not: return "(not " + query_to_string(*node.left) + ")";
        case QueryNode::Kind::And:
            return "(and " + query_to_string(*node.left) + " " +
                   query_to_string(*node.right) + ")";
        case QueryNode::Kind::Or:
            return "(or " + query_to_string(*node.left) + " " +
                   query_to_string(*node.right) + ")";
    }
    return "?";
}

// ─── Evaluation ──────────────────────────────────────────────────

struct Hit {
    std::string doc_id;
    std::int64_t score = 0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

using QueryResult = std::vector<Hit>;

namespace detail {

// A node's match set: either the ids listed, or — when negated — every
// document except the ids listed. NOT only flips the flag; complements
// are never materialized.
struct EvalSet {
    std::vector<std::string> ids;  // sorted ascending
    bool negated = false;
};

inline std::vector<std::string> set_union(const std::vector<std::string>& a,
                                          const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<std::string> set_intersect(const std::vector<std::string>& a,
                                              const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<std::string> set_diff(const std::vector<std::string>& a,
                                         const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline EvalSet eval_node(const QueryNode& node, const InvertedIndex& index) {
    switch (node.kind) {
        case QueryNode::Kind::Term: {
            EvalSet out;
            auto it = index.terms.find(node.term);
            if (it != index.terms.end()) {
                out.ids.reserve(it->second.size());
                for (const auto& p : it->second) out.ids.push_back(p.doc_id);
            }
            return out;
        }
        case QueryNode::Kind::Not: {
            EvalSet out = eval_node(*node.left, index);
            out.negated = !out.negated;
            return out;
        }
        case QueryNode::Kind::And: {
            EvalSet l = eval_node(*node.left, index);
            EvalSet r = eval_node(*node.right, index);
            EvalSet out;
            if (!l.negated && !r.negated) {
                out.ids = set_intersect(l.ids, r.ids);
            } else if (!l.negated && r.negated) {
                out.ids = set_diff(l.ids, r.ids);
            } else if (l.negated && !r.negated) {
                out.ids = set_diff(r.ids, l.ids);
            } else {
                out.ids = set_union(l.ids, r.ids);  // ¬A ∧ ¬B = ¬(A ∪ B)
                out.negated = true;
            }
            return out;
        }
        case QueryNode::Kind::Or: {
            EvalSet l = eval_node(*node.left, index);
            EvalSet r = eval_node(*node.right, index);
            EvalSet out;
            if (!l.negated && !r.negated) {
                out.ids = set_union(l.ids, r.ids);
            } else if (!l.negated && r.negated) {
                out.ids = set_diff(r.ids, l.ids);  // A ∨ ¬B = ¬(B ∖ A)
                out.negated = true;
            } else if (l.negated && !r.negated) {
                out.ids = set_diff(l.ids, r.ids);
                out.negated = true;
            } else {
                out.ids = set_intersect(l.ids, r.ids);  // ¬A ∨ ¬B = ¬(A ∩ B)
                out.negated = true;
            }
            return out;
        }
    }
    throw InternalError("query evaluation: unknown node kind");
}

inline void sort_hits(QueryResult& hits) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

}  // namespace detail

// Matching documents ranked by the summed frequency of the query's
// positive-polarity terms, highest first; ties break on ascending id.
inline QueryResult query_index(const InvertedIndex& index, const QueryAst& ast) {
    detail::EvalSet matched = detail::eval_node(ast.root(), index);
    if (matched.negated) {
        throw InternalError("query evaluation: unbounded result escaped parsing");
    }
    std::unordered_map<std::string, std::int64_t> scores;
    scores.reserve(matched.ids.size());
    for (const auto& id : matched.ids) scores[id] = 0;
    for (const auto& term : ast.positive_terms()) {
        auto it = index.terms.find(term);
        if (it == index.terms.end()) continue;
        for (const auto& p : it->second) {
            auto hit = scores.find(p.doc_id);
            if (hit != scores.end()) hit->second += p.tf;
        }
    }
    QueryResult hits;
    hits.reserve(matched.ids.size());
    for (const auto& id : matched.ids) hits.push_back({id, scores[id]});
    detail::sort_hits(hits);
    return hits;
}

namespace detail {

inline bool eval_on_doc(const QueryNode& node,
                        const std::unordered_map<std::string, std::int64_t>& tf) {
    switch (node.kind) {
        case QueryNode::Kind::Term: return tf.count(node.term) > 0;
        case QueryNode::Kind::Not: return !eval_on_doc(*node.left, tf);
        case QueryNode::Kind::And:
            return eval_on_doc(*node.left, tf) && eval_on_doc(*node.right, tf);
        case QueryNode::Kind::Or:
            return eval_on_doc(*node.left, tf) || eval_on_doc(*node.right, tf);
    }
    throw InternalError("query evaluation: unknown node kind");
}

}  // namespace detail

// Definitional evaluation: test every document directly, no index. Slow on
// purpose — this is the reference the indexed path is measured against and
// checked against, and must produce identical results.
inline QueryResult scan_query(const std::vector<Document>& docs, const QueryAst& ast) {
    QueryResult hits;
    for (const auto& doc : docs) {
        std::unordered_map<std::string, std::int64_t> tf;
        for (auto& term : tokenize(doc.text)) ++tf[std::move(term)];
        if (!detail::eval_on_doc(ast.root(), tf)) continue;
        std::int64_t score = 0;
        for (const auto& term : ast.positive_terms()) {
            auto it = tf.find(term);
            if (it != tf.end()) score += it->second;
        }
        hits.push_back({doc.id, score});
    }
    detail::sort_hits(hits);
    return hits;
}

}  // namespace movidx
