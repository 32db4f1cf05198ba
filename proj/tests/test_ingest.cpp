#include "coderag/errors.hpp"
#include "coderag/ingest.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>

using namespace coderag;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("scan accepts included extensions and skips the rest") {
    TempDir tmp;
    write_file(tmp.path() / "src/a.py", "print('hi')\n");
    write_file(tmp.path() / "docs/b.md", "# title\n");
    write_file(tmp.path() / "img/c.png", std::string("\x89PNG\r\n", 6));

    auto report = scan_repository(tmp.path(), IngestConfig{});
    REQUIRE(report.documents.size() == 2);
    CHECK(report.documents[0].doc_id == "docs/b.md");
    CHECK(report.documents[0].kind == DocKind::markdown);
    CHECK(report.documents[1].doc_id == "src/a.py");
    CHECK(report.documents[1].kind == DocKind::code);
}

TEST_CASE("exclude globs filter by relative path") {
    TempDir tmp;
    write_file(tmp.path() / "src/a.py", "x = 1\n");
    write_file(tmp.path() / "docs/b.md", "# title\n");

    IngestConfig config;
    config.exclude_globs = {"docs/**"};
    auto report = scan_repository(tmp.path(), config);
    REQUIRE(report.documents.size() == 1);
    CHECK(report.documents[0].doc_id == "src/a.py");
}

TEST_CASE("glob matching semantics") {
    CHECK(glob_match("docs/**", "docs/b.md"));
    CHECK(glob_match("docs/**", "docs/deep/c.rst"));
    CHECK_FALSE(glob_match("docs/**", "src/docs.py"));
    CHECK(glob_match("**/test_*.py", "pkg/sub/test_x.py"));
    CHECK(glob_match("*.md", "README.md"));
    CHECK_FALSE(glob_match("*.md", "docs/README.md"));
    CHECK(glob_match("a/?.py", "a/b.py"));
    CHECK_FALSE(glob_match("a/?.py", "a/bc.py"));
}

TEST_CASE("oversized and non-UTF-8 files are skipped with warnings") {
    TempDir tmp;
    write_file(tmp.path() / "big.py", std::string(2048, 'x'));
    write_file(tmp.path() / "bad.py", std::string("\xff\xfe garbage", 11));
    write_file(tmp.path() / "ok.py", "y = 2\n");

    IngestConfig config;
    config.max_file_bytes = 1024;
    auto report = scan_repository(tmp.path(), config);
    REQUIRE(report.documents.size() == 1);
    CHECK(report.documents[0].doc_id == "ok.py");
    CHECK(report.warnings.size() == 2);
}

TEST_CASE("missing root is fatal") {
    CHECK_THROWS_AS(scan_repository("/nonexistent/path/here", IngestConfig{}), IngestError);
}

TEST_CASE("empty include set is a configuration error") {
    IngestConfig config;
    config.include_extensions.clear();
    TempDir tmp;
    CHECK_THROWS_AS(scan_repository(tmp.path(), config), ConfigError);
}

TEST_CASE("utf8 validation") {
    CHECK(is_valid_utf8("plain ascii"));
    CHECK(is_valid_utf8("caf\xc3\xa9"));
    CHECK(is_valid_utf8("\xe2\x82\xac"));         // euro sign
    CHECK(is_valid_utf8("\xf0\x9f\x99\x82"));     // emoji
    CHECK_FALSE(is_valid_utf8("\xff"));
    CHECK_FALSE(is_valid_utf8("\xc3"));           // truncated sequence
    CHECK_FALSE(is_valid_utf8("\xc0\xaf"));       // overlong
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));   // surrogate
}

TEST_CASE("notebook cells become one document each with stable indices") {
    std::string nb = R"({"cells":[
        {"cell_type":"code","source":["import os\n","print(1)\n"]},
        {"cell_type":"markdown","source":"# heading"}
    ]})";
    auto docs = parse_notebook(nb, "nb.ipynb");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "nb.ipynb#cell0");
    CHECK(docs[0].kind == DocKind::notebook_code);
    CHECK(docs[0].content == "import os\nprint(1)\n");
    CHECK(docs[1].doc_id == "nb.ipynb#cell1");
    CHECK(docs[1].kind == DocKind::notebook_markdown);
}

TEST_CASE("empty cells are dropped but original indices are preserved") {
    std::string nb = R"({"cells":[
        {"cell_type":"code","source":["a = 1\n"]},
        {"cell_type":"code","source":[]},
        {"cell_type":"markdown","source":["tail"]}
    ]})";
    auto docs = parse_notebook(nb, "nb.ipynb");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "nb.ipynb#cell0");
    CHECK(docs[1].doc_id == "nb.ipynb#cell2");
}

TEST_CASE("notebook source arrays are joined in order") {
    // oracle: independent JSON parse and join of the same payload
    std::vector<std::string> lines = {"first\n", "second\n", "third"};
    std::string joined;
    for (const auto& l : lines)
        joined += l;

    std::string nb = R"({"cells":[{"cell_type":"code","source":["first\n","second\n","third"]}]})";
    auto docs = parse_notebook(nb, "nb.ipynb");
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].content == joined);
}

TEST_CASE("malformed notebooks are skipped with a warning during scan") {
    TempDir tmp;
    write_file(tmp.path() / "broken.ipynb", "{not json");
    write_file(tmp.path() / "nocells.ipynb", R"({"metadata":{}})");
    write_file(tmp.path() / "good.ipynb",
               R"({"cells":[{"cell_type":"code","source":["ok = 1\n"]}]})");

    auto report = scan_repository(tmp.path(), IngestConfig{});
    REQUIRE(report.documents.size() == 1);
    CHECK(report.documents[0].doc_id == "good.ipynb#cell0");
    CHECK(report.warnings.size() == 2);

    CHECK_THROWS_AS(parse_notebook("{not json", "broken.ipynb"), IngestError);
    CHECK_THROWS_AS(parse_notebook(R"({"metadata":{}})", "nocells.ipynb"), IngestError);
}

TEST_CASE("scanning twice is idempotent and deterministic") {
    TempDir tmp;
    write_file(tmp.path() / "z.py", "z = 1\n");
    write_file(tmp.path() / "a.py", "a = 1\n");
    write_file(tmp.path() / "m/mid.rst", "rst body\n");

    auto first = scan_repository(tmp.path(), IngestConfig{});
    auto second = scan_repository(tmp.path(), IngestConfig{});
    REQUIRE(first.documents.size() == second.documents.size());
    for (std::size_t i = 0; i < first.documents.size(); ++i) {
        CHECK(first.documents[i].doc_id == second.documents[i].doc_id);
        CHECK(first.documents[i].content == second.documents[i].content);
    }
    CHECK(std::is_sorted(first.documents.begin(), first.documents.end(),
                         [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; }));
}

TEST_CASE("no accepted document has empty content") {
    TempDir tmp;
    write_file(tmp.path() / "empty.py", "");
    write_file(tmp.path() / "full.py", "x = 1\n");
    auto report = scan_repository(tmp.path(), IngestConfig{});
    REQUIRE(report.documents.size() == 1);
    for (const auto& doc : report.documents)
        CHECK(!doc.content.empty());
}

TEST_CASE("document count matches an independent directory walk") {
    // oracle: a recursive walk + extension filter written against
    // std::filesystem directly, independent of the scanner
    TempDir tmp;
    int expected = 0;
    for (int i = 0; i < 40; ++i) {
        std::string sub = (i % 3 == 0) ? "pkg/" : (i % 3 == 1 ? "docs/" : "");
        std::string ext = (i % 4 == 0) ? ".py" : (i % 4 == 1 ? ".md" : (i % 4 == 2 ? ".rst" : ".txt"));
        write_file(tmp.path() / (sub + "f" + std::to_string(i) + ext), "content " + std::to_string(i));
    }
    for (const auto& entry : std::filesystem::recursive_directory_iterator(tmp.path())) {
        if (!entry.is_regular_file())
            continue;
        auto ext = entry.path().extension().string();
        if (ext == ".py" || ext == ".md" || ext == ".rst")
            ++expected;
    }
    auto report = scan_repository(tmp.path(), IngestConfig{});
    CHECK(report.documents.size() == static_cast<std::size_t>(expected));
}
