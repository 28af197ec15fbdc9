#include <doctest.h>

#include "autoform/prompts.hpp"
#include "support/testutil.hpp"

namespace prompts = autoform::prompts;
using prompts::Exemplar;
using prompts::PbdVariant;

namespace {

std::vector<Exemplar> golden_exemplars() {
    return {
        {"The union of open sets is open.", "lemma u1: shows \"\\<Union>A \\<in> T\"", "id1"},
        {"The empty set is open.", "lemma e1: shows \"0 \\<in> T\"", "id2"},
        {"Open sets are neighborhoods.", "lemma n1: shows \"U \\<in> N\"", "id3"},
    };
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("rendered prompts match their golden files") {
    auto exemplars = golden_exemplars();
    autoform::checker::SyntaxDiagnostic d{1, 12, 17, "unknown Isabelle symbol \\<zzz>",
                                          autoform::checker::Severity::error};
    std::vector<std::pair<std::string, std::string>> cases = {
        {"informalize.golden",
         prompts::render_informalization("lemma a1: shows \"x \\<in> X\"").text},
        {"autoformalize_zero_shot.golden",
         prompts::render_autoformalization({}, "Open sets contain their points.").text},
        {"autoformalize_three_shot.golden",
         prompts::render_autoformalization(exemplars, "Open sets contain their points.").text},
        {"pbd_1a.golden", prompts::render_pbd(PbdVariant::v1a, {}, "lemma b1: shows \"y = y\"").text},
        {"pbd_1b.golden", prompts::render_pbd(PbdVariant::v1b, {}, "lemma b1: shows \"y = y\"").text},
        {"pbd_1c.golden",
         prompts::render_pbd(PbdVariant::v1c, exemplars, "lemma b1: shows \"y = y\"").text},
        {"pbd_1d.golden",
         prompts::render_pbd(PbdVariant::v1d, exemplars, "lemma b1: shows \"y = y\"").text},
        {"autosef.golden",
         prompts::render_autosef(exemplars, d, "lemma b1: shows \"y \\<zzz> y\"").text},
    };
    for (const auto& [file, rendered] : cases) {
        CAPTURE(file);
        CHECK(rendered == testutil::read_file(testutil::fixture_path("prompts/" + file)));
    }
}

TEST_CASE("placeholder audit: sentinels appear exactly once with no template residue") {
    const std::string s1 = "SENTINEL_STATEMENT_9f2";
    const std::string s2 = "SENTINEL_NL_77x";
    const std::string s3 = "SENTINEL_CODE_41q";
    const std::string s4 = "SENTINEL_FORMAL_e00";

    auto inf = prompts::render_informalization(s1).text;
    CHECK(count_occurrences(inf, s1) == 1);
    CHECK(inf.find("{statement}") == std::string::npos);

    auto af = prompts::render_autoformalization({{s2, s4, "x"}}, s2 + "-query").text;
    CHECK(count_occurrences(af, s2 + "-query") == 1);
    CHECK(count_occurrences(af, s4) == 1);
    CHECK(af.find("{natural_language}") == std::string::npos);
    CHECK(af.find("{formal}") == std::string::npos);

    for (auto variant : {PbdVariant::v1a, PbdVariant::v1b, PbdVariant::v1c, PbdVariant::v1d}) {
        std::vector<Exemplar> ex;
        if (variant == PbdVariant::v1c || variant == PbdVariant::v1d) ex = {{"", s4, "x"}};
        auto text = prompts::render_pbd(variant, ex, s3).text;
        CAPTURE(static_cast<int>(variant));
        CHECK(count_occurrences(text, s3) == 1);
        CHECK(text.find("{code}") == std::string::npos);
        CHECK(text.find("{style_instruction}") == std::string::npos);
        CHECK(text.find("{exemplar_statements}") == std::string::npos);
    }

    autoform::checker::SyntaxDiagnostic d{3, 7, -1, "SENTINEL_MESSAGE_z1",
                                          autoform::checker::Severity::error};
    auto sef = prompts::render_autosef({{"", s4, "x"}}, d, s3).text;
    CHECK(count_occurrences(sef, s3) == 1);
    CHECK(count_occurrences(sef, "SENTINEL_MESSAGE_z1") == 1);
    CHECK(count_occurrences(sef, s4) == 1);
    CHECK(sef.find("{error_details}") == std::string::npos);
}

TEST_CASE("informalization prompt substitutes the statement verbatim") {
    auto p = prompts::render_informalization("lemma x: shows \"{a} = {a}\"");
    CHECK(p.text.rfind("Translate the following Isabelle/ZF code:", 0) == 0);
    CHECK(p.text.find("lemma x: shows \"{a} = {a}\"") != std::string::npos);
    CHECK(p.family == prompts::Family::informalize);
    CHECK_THROWS_AS(prompts::render_informalization(""), prompts::EmptyInputError);
}

TEST_CASE("autoformalization prompt shapes") {
    auto zero = prompts::render_autoformalization({}, "A natural language query.");
    CHECK(count_occurrences(zero.text, "Natural language version:") == 1);
    CHECK(zero.exemplar_ids.empty());

    auto exemplars = golden_exemplars();
    auto three = prompts::render_autoformalization(exemplars, "A natural language query.");
    CHECK(count_occurrences(three.text, "Natural language version:") == 4);
    CHECK(three.exemplar_ids == std::vector<std::string>{"id1", "id2", "id3"});
    // retrieval rank order is preserved
    CHECK(three.text.find(exemplars[0].formal) < three.text.find(exemplars[1].formal));
    CHECK(three.text.find(exemplars[1].formal) < three.text.find(exemplars[2].formal));

    auto again = prompts::render_autoformalization(exemplars, "A natural language query.");
    CHECK(again.text == three.text);
}

TEST_CASE("pbd variants differ exactly by the stylistic instruction blocks") {
    const std::string code = "lemma b1: shows \"y = y\"";
    auto a = prompts::render_pbd(PbdVariant::v1a, {}, code);
    auto b = prompts::render_pbd(PbdVariant::v1b, {}, code);
    CHECK(a.text.find("4. The cleaned code") == std::string::npos);
    CHECK(b.text.find("4. The cleaned code") != std::string::npos);

    // 1B is 1A plus the instruction-4 block
    auto pos = b.text.find("4. The cleaned code");
    auto end = b.text.find("Strictly follow");
    std::string without_block = b.text.substr(0, pos) + b.text.substr(end);
    CHECK(without_block == a.text);

    auto exemplars = golden_exemplars();
    auto d = prompts::render_pbd(PbdVariant::v1d, exemplars, code);
    for (const auto& e : exemplars) {
        CHECK(d.text.find(e.formal) != std::string::npos);
        CHECK(d.text.find(e.nl) == std::string::npos);  // statements only, no NL
    }
    CHECK(prompts::render_pbd(PbdVariant::v1c, exemplars, code).family ==
          prompts::Family::pbd_1c);
    CHECK_THROWS_AS(prompts::render_pbd(PbdVariant::v1c, {}, code),
                    prompts::MissingExemplarsError);
    CHECK_THROWS_AS(prompts::render_pbd(PbdVariant::v1d, {}, code),
                    prompts::MissingExemplarsError);
}

TEST_CASE("autosef prompt carries the first error details before the refined-code slot") {
    autoform::checker::SyntaxDiagnostic d{1, 12, -1, "mismatched bracket",
                                          autoform::checker::Severity::error};
    auto p = prompts::render_autosef(golden_exemplars(), d, "lemma b1: shows \"(y\"");
    auto error_pos = p.text.find("Error at line 1, offset 12: mismatched bracket");
    auto refined_pos = p.text.find("Refined Code:");
    REQUIRE(error_pos != std::string::npos);
    REQUIRE(refined_pos != std::string::npos);
    CHECK(error_pos < refined_pos);
    CHECK_THROWS_AS(prompts::render_autosef({}, d, "code"), prompts::MissingExemplarsError);
}

TEST_CASE("template files on disk equal the builtin set") {
    auto from_disk = prompts::TemplateSet::load_dir(testutil::data_path("templates"));
    for (const auto& name : prompts::TemplateSet::file_names()) {
        CAPTURE(name);
        CHECK(from_disk.raw(name) == prompts::TemplateSet::builtin().raw(name));
    }
    CHECK_THROWS_AS(prompts::TemplateSet::load_dir("/nonexistent-template-dir"),
                    prompts::TemplateError);
}

TEST_CASE("fixed exemplars load from the versioned fixture") {
    auto fixed = prompts::load_fixed_exemplars(testutil::data_path("fixed_exemplars.json"));
    REQUIRE(fixed.size() == 3);
    for (const auto& e : fixed) {
        CHECK(!e.formal.empty());
        CHECK(e.nl.empty());
    }
    CHECK(fixed[0].id == "fixed1");
}
