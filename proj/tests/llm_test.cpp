#include <doctest.h>

#include "autoform/corpus.hpp"
#include "autoform/llm.hpp"
#include "autoform/prompts.hpp"
#include "support/testutil.hpp"

namespace llm = autoform::llm;
namespace corpus = autoform::corpus;
namespace prompts = autoform::prompts;

namespace {

std::shared_ptr<corpus::Dataset> fixture_dataset() {
    auto dataset = std::make_shared<corpus::Dataset>();
    for (const auto& file :
         {"Topology_ZF_1.thy", "Topology_ZF_2.thy", "Int_ZF_1.thy", "Group_ZF_1.thy"}) {
        auto text = testutil::read_file(testutil::data_path(std::string("corpus/") + file));
        auto parsed = corpus::parse_theory_file(text, file);
        for (auto& item : parsed.items) {
            item.split = corpus::Split::train;
            dataset->items.push_back(std::move(item));
        }
    }
    return dataset;
}

}  // namespace

TEST_CASE("scripted provider replays its table and rejects unknown prompts") {
    llm::ScriptedProvider provider(std::map<std::string, std::string>{{"P", "R"}});
    CHECK(provider.complete({"P", {}, "s"}).text == "R");
    CHECK(provider.complete({"P", {}, "s"}).text == "R");
    CHECK(provider.call_count() == 2);
    try {
        provider.complete({"unknown", {}, "s"});
        FAIL("expected ProviderUnavailableError");
    } catch (const llm::ProviderUnavailableError& e) {
        CHECK(std::string(e.what()).find("unscripted prompt") != std::string::npos);
    }
}

TEST_CASE("clean noise spec is the identity") {
    llm::NoiseSpec spec;
    CHECK(spec.clean());
    auto noisy = llm::apply_noise("lemma a: shows \"x \\<in> X\"", spec, 1);
    CHECK(noisy.text == "lemma a: shows \"x \\<in> X\"");
    CHECK(noisy.edits.empty());
    CHECK(noisy.appended.empty());
}

TEST_CASE("appended proof noise starts a proof block that cleanup must strip") {
    llm::NoiseSpec spec;
    spec.append_proof = true;
    spec.seed = 5;
    auto noisy = llm::apply_noise("lemma a: shows \"x \\<in> X\"", spec, 42);
    CHECK(noisy.text.rfind("lemma a: shows \"x \\<in> X\"\n", 0) == 0);
    REQUIRE(!noisy.appended.empty());
    bool starts_proof = false;
    for (const char* kw : {"\nproof", "\nby ", "\nusing ", "\napply "}) {
        if (noisy.appended.rfind(kw, 0) == 0) starts_proof = true;
    }
    CHECK(starts_proof);
}

TEST_CASE("full symbol corruption rewrites every membership token") {
    llm::NoiseSpec spec;
    spec.corrupt_symbol_rate = 1.0;
    spec.seed = 9;
    auto noisy =
        llm::apply_noise("lemma a: assumes \"x \\<in> X\" shows \"y \\<in> Y\"", spec, 1);
    CHECK(noisy.text == "lemma a: assumes \"x :: X\" shows \"y :: Y\"");
    CHECK(noisy.edits.size() == 2);
}

TEST_CASE("full bracket dropping strips brackets inside formulas only") {
    llm::NoiseSpec spec;
    spec.drop_bracket_rate = 1.0;
    spec.seed = 4;
    auto noisy = llm::apply_noise("lemma a(1): shows \"f(x) \\<in> Pow(y)\"", spec, 1);
    // header parens survive, formula parens are gone
    CHECK(noisy.text == "lemma a(1): shows \"fx \\<in> Powy\"");
    CHECK(noisy.edits.size() == 4);
    for (const auto& edit : noisy.edits) CHECK(edit.replacement.empty());
}

TEST_CASE("noise is deterministic per seed and item salt") {
    llm::NoiseSpec spec;
    spec.append_explanation = true;
    spec.corrupt_symbol_rate = 0.5;
    spec.seed = 77;
    const char* statement = "lemma a: assumes \"x \\<in> X\" shows \"y \\<in> Y\"";
    auto a = llm::apply_noise(statement, spec, llm::item_salt("item1"));
    auto b = llm::apply_noise(statement, spec, llm::item_salt("item1"));
    auto c = llm::apply_noise(statement, spec, llm::item_salt("item2"));
    CHECK(a.text == b.text);
    CHECK(llm::item_salt("item1") != llm::item_salt("item2"));
    (void)c;  // different salt may or may not alter the draw; purity is the point
}

TEST_CASE("noise subsets apply individual edits") {
    std::vector<llm::NoiseEdit> edits = {{5, 10, "::", "sym"}, {18, 19, "", "drop"}};
    std::string clean = "text \\<in> more (x) tail";
    auto full = llm::apply_noise_subset(clean, edits, 0b11, "+suffix");
    CHECK(full == "text :: more (x tail+suffix");
    auto first_only = llm::apply_noise_subset(clean, edits, 0b01, "");
    CHECK(first_only == "text :: more (x) tail");
    auto none = llm::apply_noise_subset(clean, edits, 0b00, "");
    CHECK(none == clean);
}

TEST_CASE("oracle answers autoformalization prompts from the ground truth") {
    auto dataset = fixture_dataset();
    llm::NoiseSpec clean;
    llm::OracleProvider oracle(dataset, clean);
    const auto& item = dataset->items[3];
    auto prompt = prompts::render_autoformalization({}, item.comment);
    auto result = oracle.complete({prompt.text, {}, "oracle"});
    CHECK(result.text == item.formal_statement);

    auto unknown = prompts::render_autoformalization({}, "a comment nobody wrote");
    CHECK_THROWS_AS(oracle.complete({unknown.text, {}, "oracle"}),
                    llm::ProviderUnavailableError);
}

TEST_CASE("oracle answers informalization prompts with the item comment") {
    auto dataset = fixture_dataset();
    llm::OracleProvider oracle(dataset, {});
    const auto& item = dataset->items[4];
    auto prompt = prompts::render_informalization(item.formal_statement);
    CHECK(oracle.complete({prompt.text, {}, "oracle"}).text == item.comment);
}

TEST_CASE("oracle repairs exactly the reported error span") {
    auto dataset = fixture_dataset();
    llm::NoiseSpec spec;
    spec.corrupt_symbol_rate = 1.0;
    spec.seed = 123;

    // find an item whose statement carries at least two membership tokens
    const corpus::CorpusItem* target = nullptr;
    for (const auto& item : dataset->items) {
        auto noisy = llm::apply_noise(item.formal_statement, spec, llm::item_salt(item.id));
        if (noisy.edits.size() >= 2) {
            target = &item;
            break;
        }
    }
    REQUIRE(target != nullptr);
    auto noisy = llm::apply_noise(target->formal_statement, spec, llm::item_salt(target->id));

    llm::OracleProvider oracle(dataset, spec);
    autoform::LineIndex lines(noisy.text);
    autoform::checker::SyntaxDiagnostic first;
    first.line = lines.line(noisy.edits[0].begin);
    first.offset = lines.column(noisy.edits[0].begin);
    first.message = "'::' type ascription is not Isabelle/ZF syntax";
    std::vector<prompts::Exemplar> exemplars = {{"", "lemma e: shows \"a = a\"", "e"}};
    auto prompt = prompts::render_autosef(exemplars, first, noisy.text);
    auto repaired = oracle.complete({prompt.text, {}, "oracle"}).text;

    uint64_t all_but_first = ((uint64_t{1} << noisy.edits.size()) - 1) & ~uint64_t{1};
    auto expected =
        llm::apply_noise_subset(target->formal_statement, noisy.edits, all_but_first, "");
    CHECK(repaired == expected);
    CHECK(repaired != target->formal_statement);  // later corruption still present
}

TEST_CASE("oracle greedy replay is pure") {
    auto dataset = fixture_dataset();
    llm::NoiseSpec spec;
    spec.append_explanation = true;
    spec.seed = 31;
    llm::OracleProvider a(dataset, spec);
    llm::OracleProvider b(dataset, spec);
    auto prompt = prompts::render_autoformalization({}, dataset->items[5].comment);
    CHECK(a.complete({prompt.text, {}, "o"}).text == b.complete({prompt.text, {}, "o"}).text);
    CHECK(a.complete({prompt.text, {}, "o"}).text == a.complete({prompt.text, {}, "o"}).text);
}
