#include "coderag/errors.hpp"
#include "coderag/indexes.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace coderag;

TEST_CASE("tokenizer: identifier splitting emits whole and parts") {
    // oracle: hand application of the stated rules
    CHECK(tokenize("apply_gate(state)") ==
          std::vector<std::string>{"apply_gate", "apply", "gate", "state"});
    CHECK(tokenize("TFIM") == std::vector<std::string>{"tfim"});

    auto snake = tokenize("set_parameters");
    auto camel = tokenize("SetParameters");
    CHECK(snake == std::vector<std::string>{"set_parameters", "set", "parameters"});
    CHECK(camel == std::vector<std::string>{"setparameters", "set", "parameters"});
    // whole-identifier tokens differ, part tokens agree
    CHECK(snake[0] != camel[0]);
    CHECK(std::vector<std::string>(snake.begin() + 1, snake.end()) ==
          std::vector<std::string>(camel.begin() + 1, camel.end()));
}

TEST_CASE("tokenizer: short-token rule") {
    CHECK(tokenize("x") == std::vector<std::string>{"x"}); // whole input shorter than 2
    CHECK(tokenize("a b").empty());                        // 1-char tokens dropped
    CHECK(tokenize("a_b") == std::vector<std::string>{"a_b"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("...!!!") == std::vector<std::string>{});
}

namespace {

LexicalIndex fixture_index() {
    // D1=[hadamard,gate,circuit], D2=[measure,qubit,circuit,circuit], D3=[noise,channel]
    return build_lexical_index({"D1", "D2", "D3"},
                               {"hadamard gate circuit", "measure qubit circuit circuit",
                                "noise channel"});
}

} // namespace

TEST_CASE("bm25: hand-computed fixture scores") {
    auto index = fixture_index();
    CHECK(index.avgdl == doctest::Approx(3.0));
    CHECK(index.size() == 3);

    auto scores = bm25_scores({"circuit"}, index);
    REQUIRE(scores.size() == 2);
    // oracle: hand evaluation of the formula with idf = ln(1.6)
    CHECK(scores.at("D1") == doctest::Approx(0.4700).epsilon(1e-3));
    CHECK(scores.at("D2") == doctest::Approx(0.5908).epsilon(1e-3));
    CHECK(scores.count("D3") == 0);

    CHECK(std::fabs(scores.at("D1") - std::log(1.6)) < 1e-12);
    double expected_d2 = std::log(1.6) * (2.0 * 2.2) / (2.0 + 1.2 * (0.25 + 0.75 * 4.0 / 3.0));
    CHECK(std::fabs(scores.at("D2") - expected_d2) < 1e-12);
}

TEST_CASE("bm25: absent terms and empty queries give empty maps") {
    auto index = fixture_index();
    CHECK(bm25_scores({"entanglement"}, index).empty());
    CHECK(bm25_scores({}, index).empty());
}

TEST_CASE("bm25: idf is nonnegative for every document frequency") {
    for (int n_docs = 1; n_docs <= 50; ++n_docs) {
        for (int n_q = 0; n_q <= n_docs; ++n_q) {
            double idf = std::log((n_docs - n_q + 0.5) / (n_q + 0.5) + 1.0);
            CHECK(idf >= 0.0);
        }
    }
}

TEST_CASE("bm25: scores are nonnegative and adding a term occurrence never lowers the score") {
    std::mt19937_64 rng{42};
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n_docs = 2 + rng() % 8;
        std::vector<std::string> ids, texts;
        for (std::size_t d = 0; d < n_docs; ++d) {
            ids.push_back("doc" + std::to_string(d));
            texts.push_back(testutil::synthetic_words(rng(), 3 + rng() % 20));
        }
        auto index = build_lexical_index(ids, texts);

        std::size_t target = rng() % n_docs;
        auto tokens = tokenize(texts[target]);
        REQUIRE(!tokens.empty());
        std::string term = tokens[rng() % tokens.size()];

        auto before = bm25_scores({term}, index);
        for (const auto& [id, score] : before)
            CHECK(score >= 0.0);

        auto boosted = texts;
        boosted[target] += " " + term;
        auto index2 = build_lexical_index(ids, boosted);
        auto after = bm25_scores({term}, index2);
        CHECK(after.at(ids[target]) >= before.at(ids[target]) - 1e-12);
    }
}

TEST_CASE("bm25: rebuilding from the same corpus yields identical indexes") {
    std::vector<std::string> ids = {"a", "b", "c"};
    std::vector<std::string> texts = {"alpha beta gamma", "beta beta delta", "gamma alpha alpha"};
    auto first = build_lexical_index(ids, texts);
    auto second = build_lexical_index(ids, texts);
    CHECK(first.avgdl == second.avgdl);
    CHECK(first.doc_lengths == second.doc_lengths);
    REQUIRE(first.postings.size() == second.postings.size());
    for (const auto& [term, list] : first.postings) {
        REQUIRE(second.postings.count(term) == 1);
        CHECK(second.postings.at(term) == list);
    }
}

TEST_CASE("vector ranking: singleton and self-similarity") {
    auto index = build_vector_index({"only"}, {{0.1f, 0.2f}});
    auto ranked = vector_ranking({1.0f, 0.0f}, index);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].chunk_id == "only");
    CHECK(ranked[0].rank == 0);

    auto index2 = build_vector_index({"a", "b"}, {{1.0f, 0.0f}, {0.0f, 1.0f}});
    auto ranked2 = vector_ranking({0.0f, 1.0f}, index2);
    CHECK(ranked2[0].chunk_id == "b");
    CHECK(ranked2[0].cosine == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("vector ranking matches a brute-force sort") {
    // oracle: naive pairwise cosine + sort, coded independently
    std::mt19937_64 rng{7};
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 5, dim = 6;
        std::vector<std::string> ids;
        std::vector<EmbeddingVector> vecs;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back("c" + std::to_string(i));
            EmbeddingVector v(dim);
            for (auto& x : v)
                x = dist(rng);
            vecs.push_back(v);
        }
        EmbeddingVector q(dim);
        for (auto& x : q)
            x = dist(rng);

        std::vector<std::pair<double, std::string>> expected;
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0, nq = 0, nv = 0;
            for (std::size_t d = 0; d < dim; ++d) {
                dot += double(q[d]) * vecs[i][d];
                nq += double(q[d]) * q[d];
                nv += double(vecs[i][d]) * vecs[i][d];
            }
            expected.push_back({dot / (std::sqrt(nq) * std::sqrt(nv)), ids[i]});
        }
        std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first)
                return a.first > b.first;
            return a.second < b.second;
        });

        auto index = build_vector_index(ids, vecs);
        auto ranked = vector_ranking(q, index);
        REQUIRE(ranked.size() == n);
        std::set<std::string> seen;
        for (std::size_t r = 0; r < n; ++r) {
            CHECK(ranked[r].rank == r);
            CHECK(ranked[r].chunk_id == expected[r].second);
            CHECK(ranked[r].cosine == doctest::Approx(expected[r].first).epsilon(1e-12));
            seen.insert(ranked[r].chunk_id);
        }
        CHECK(seen.size() == n); // permutation of all ids
    }
}

TEST_CASE("vector ranking: dimension mismatch is a domain error") {
    auto index = build_vector_index({"a"}, {{1.0f, 0.0f}});
    CHECK_THROWS_AS(vector_ranking({1.0f, 0.0f, 0.0f}, index), DomainError);
}

TEST_CASE("ties are broken by ascending chunk_id") {
    auto index = build_vector_index({"zed", "ant", "mid"},
                                    {{1.0f, 0.0f}, {1.0f, 0.0f}, {1.0f, 0.0f}});
    auto ranked = vector_ranking({1.0f, 0.0f}, index);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].chunk_id == "ant");
    CHECK(ranked[1].chunk_id == "mid");
    CHECK(ranked[2].chunk_id == "zed");
}
