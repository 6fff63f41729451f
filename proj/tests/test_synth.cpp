#include "tclforge/synth.hpp"

#include <cstdio>
#include <filesystem>

#include "doctest.h"

using namespace tclforge;
using namespace tclforge::synth;

namespace {

const std::string kDataDir = TCLFORGE_DATA_DIR;

const CommandDatabase& fixture_db() {
    static CommandDatabase db = load_schema_or_throw(kDataDir + "/schema/innovus_core.json");
    return db;
}

/// Teacher that honors the sentinel contract and derives unique-but-
/// deterministic payloads from the request digest.
llm::MockFixture contract_teacher() {
    llm::MockFixture f;
    f.mode = llm::MockFixture::Mode::Rules;
    f.rules.push_back({"BEGIN_REQUIREMENT",
                       {200, "noise before\nBEGIN_REQUIREMENT\nConfigure the flow step "
                             "({digest}).\nEND_REQUIREMENT\nnoise after"}});
    f.rules.push_back({"BEGIN_COT",
                       {200, "BEGIN_COT\nStep 1: read the requirement ({digest}).\nStep 2: pick "
                             "the commands.\nEND_COT"}});
    return f;
}

llm::EndpointConfig teacher_endpoint() {
    llm::EndpointConfig e;
    e.name = "teacher";
    e.model = "mock-teacher";
    e.backoff_base_ms = 1;
    return e;
}

std::string temp_path(const std::string& stem) {
    auto dir = std::filesystem::temp_directory_path() / "tclforge_synth_tests";
    std::filesystem::create_directories(dir);
    return (dir / stem).string();
}

SynthConfig small_config(std::size_t count, std::uint64_t seed) {
    SynthConfig c;
    c.target_fragment_count = count;
    c.rng_seed = seed;
    c.max_teacher_retries = 2;
    c.stage3_concurrency = 3;
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("generate_fragments is byte-deterministic for a fixed seed") {
    SynthConfig cfg = small_config(1000, 7);
    Rng a(cfg.rng_seed), b(cfg.rng_seed);
    auto run1 = generate_fragments(fixture_db(), cfg, a);
    auto run2 = generate_fragments(fixture_db(), cfg, b);
    REQUIRE(run1.size() == 1000);
    REQUIRE(run2.size() == 1000);
    for (std::size_t i = 0; i < run1.size(); ++i) {
        CHECK(run1[i].script == run2[i].script);
        CHECK(run1[i].category == run2[i].category);
        CHECK(run1[i].mutation == run2[i].mutation);
    }
}

TEST_CASE("mutation probability 0 means every fragment survives the filter") {
    SynthConfig cfg = small_config(400, 11);
    cfg.mutation_probability = 0.0;
    Rng rng(cfg.rng_seed);
    auto fragments = generate_fragments(fixture_db(), cfg, rng);
    std::vector<std::string> scripts;
    for (const auto& f : fragments) scripts.push_back(f.script);
    FilterResult filtered = filter_corpus(scripts, fixture_db());
    for (const auto& [script, report] : filtered.rejects) {
        CAPTURE(script);
        CAPTURE(report.violations.empty() ? "" : report.violations[0].message);
        CHECK(false);
    }
    CHECK(filtered.survivors.size() == fragments.size());
}

TEST_CASE("drop-required mutations never survive the filter") {
    SynthConfig cfg = small_config(400, 13);
    cfg.mutation_probability = 1.0;
    cfg.mutators = {"drop-required"};
    Rng rng(cfg.rng_seed);
    auto fragments = generate_fragments(fixture_db(), cfg, rng);
    std::size_t mutated = 0;
    for (const auto& f : fragments) {
        if (f.mutation != "drop-required") continue;
        ++mutated;
        LintReport r = lint_script(f.script, fixture_db());
        CAPTURE(f.script);
        CHECK(!r.pass);
    }
    CHECK(mutated > 100);  // the mutator applies whenever a required option exists
}

TEST_CASE("misspell and scramble mutations fail lint too") {
    SynthConfig cfg = small_config(300, 17);
    cfg.mutation_probability = 1.0;
    Rng rng(cfg.rng_seed);
    auto fragments = generate_fragments(fixture_db(), cfg, rng);
    std::size_t checked = 0;
    for (const auto& f : fragments) {
        if (f.mutation.empty()) continue;
        ++checked;
        LintReport r = lint_script(f.script, fixture_db());
        CAPTURE(f.script);
        CAPTURE(f.mutation);
        CHECK(!r.pass);
    }
    CHECK(checked > 250);
}

TEST_CASE("category mix restricts sampled categories") {
    SynthConfig cfg = small_config(200, 19);
    cfg.category_mix = {{"TAO", 1.0}};
    Rng rng(cfg.rng_seed);
    auto fragments = generate_fragments(fixture_db(), cfg, rng);
    for (const auto& f : fragments) CHECK(f.category == "TAO");
}

TEST_CASE("invalid configs are rejected") {
    SynthConfig bad = small_config(10, 1);
    bad.commands_per_fragment_min = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SynthConfig bad2 = small_config(10, 1);
    bad2.category_mix = {{"DIQA", 0.0}};
    CHECK_THROWS_AS(bad2.validate(), ConfigError);
    SynthConfig bad3 = small_config(10, 1);
    bad3.mutators = {"swap-words"};
    CHECK_THROWS_AS(bad3.validate(), ConfigError);
}

TEST_CASE("normalize_script collapses whitespace, separators and comments") {
    std::string a = "placeDesign   -noPrePlaceOpt\n\n\n# comment\noptDesign\t-preCTS\n";
    std::string b = "placeDesign -noPrePlaceOpt;optDesign -preCTS";
    CHECK(normalize_script(a) == normalize_script(b));
    CHECK(normalized_hash(a) == normalized_hash(b));
    CHECK(normalized_hash("placeDesign\n") != normalized_hash("optDesign\n"));
}

TEST_CASE("sentinel block extraction") {
    CHECK(extract_sentinel_block("BEGIN_REQUIREMENT\nhello\nEND_REQUIREMENT", "REQUIREMENT") ==
          "hello");
    CHECK(extract_sentinel_block("junk\nBEGIN_COT\na\nb\nEND_COT\nmore", "COT") == "a\nb");
    CHECK(!extract_sentinel_block("BEGIN_COT\nno terminator", "COT").has_value());
    CHECK(!extract_sentinel_block("no blocks at all", "REQUIREMENT").has_value());
    CHECK(!extract_sentinel_block("BEGIN_COT\nEND_COT", "COT").has_value());  // empty payload
}

TEST_CASE("back-inference: canned requirement is carried verbatim") {
    auto [client, transport] = llm::make_mock_client(
        teacher_endpoint(),
        llm::MockFixture::sequence_of(
            {{200, "BEGIN_REQUIREMENT\nPlace the design.\nEND_REQUIREMENT"}}));
    TeacherResult r = back_infer_requirement("placeDesign\n", *client, fixture_db());
    CHECK(r.text == "Place the design.");
    CHECK(r.retries == 0);
    // The prompt carried the script and its doc bundle.
    auto recorded = transport->recorded();
    REQUIRE(recorded.size() == 1);
    const std::string& prompt = recorded[0].messages[0].content;
    CHECK(prompt.find("placeDesign") != std::string::npos);
    CHECK(prompt.find(fixture_db().specs.at("placeDesign").doc) != std::string::npos);
}

TEST_CASE("back-inference: malformed twice then valid succeeds with retry count 2") {
    auto [client, transport] = llm::make_mock_client(
        teacher_endpoint(),
        llm::MockFixture::sequence_of(
            {{200, "no sentinels"},
             {200, "BEGIN_REQUIREMENT\nEND_REQUIREMENT"},
             {200, "BEGIN_REQUIREMENT\nFix hold.\nEND_REQUIREMENT"}}));
    TeacherResult r = back_infer_requirement("optDesign -postCTS -hold\n", *client, fixture_db(),
                                             /*max_retries=*/2);
    CHECK(r.text == "Fix hold.");
    CHECK(r.retries == 2);
}

TEST_CASE("back-inference: always-malformed teacher raises the contract error") {
    auto [client, transport] = llm::make_mock_client(
        teacher_endpoint(),
        llm::MockFixture::sequence_of({{200, "a"}, {200, "b"}, {200, "c"}}));
    CHECK_THROWS_AS(
        back_infer_requirement("placeDesign\n", *client, fixture_db(), /*max_retries=*/2),
        TeacherContractError);
}

TEST_CASE("cot prompt contains both requirement and script") {
    auto [client, transport] = llm::make_mock_client(
        teacher_endpoint(),
        llm::MockFixture::sequence_of({{200, "BEGIN_COT\nreasoned.\nEND_COT"}}));
    TeacherResult r = generate_cot("Run placement with high effort.",
                                   "setPlaceMode -congEffort high\nplaceDesign\n", *client,
                                   fixture_db());
    CHECK(r.text == "reasoned.");
    const std::string& prompt = transport->recorded()[0].messages[0].content;
    CHECK(prompt.find("Run placement with high effort.") != std::string::npos);
    CHECK(prompt.find("setPlaceMode -congEffort high") != std::string::npos);
}

TEST_CASE("run_pipeline: end-to-end with mock teacher") {
    std::string out = temp_path("e2e_dataset.jsonl");
    std::filesystem::remove(out);
    std::filesystem::remove(out + ".manifest.json");

    auto [teacher, transport] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
    SynthConfig cfg = small_config(200, 23);
    PipelineResult result = run_pipeline(cfg, fixture_db(), *teacher, out);

    CHECK(result.counts.generated == 200);
    CHECK(result.counts.lint_pass <= result.counts.generated);
    CHECK(result.counts.deduped <= result.counts.lint_pass);
    CHECK(result.counts.emitted == result.counts.deduped);  // contract teacher never drops
    CHECK(result.counts.emitted > 100);

    // Every emitted script re-passes lint; requirement and cot are non-empty;
    // no two tuples share a normalized hash.
    std::set<std::string> hashes;
    for (const std::string& line : split_lines(read_file(out))) {
        if (trim(line).empty()) continue;
        auto rec = nlohmann::json::parse(line);
        std::string script = rec.at("script").get<std::string>();
        CHECK(lint_script(script, fixture_db()).pass);
        CHECK(!trim(rec.at("requirement").get<std::string>()).empty());
        CHECK(!trim(rec.at("cot").get<std::string>()).empty());
        CHECK(hashes.insert(normalized_hash(script)).second);
    }
    CHECK(hashes.size() == result.counts.emitted);

    // Manifest records config, digests and stage counts.
    auto manifest = nlohmann::json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest.at("schema_digest") == schema_digest(fixture_db()));
    CHECK(manifest.at("counts").at("generated") == 200);
    CHECK(manifest.at("counts").at("emitted") == result.counts.emitted);
}

TEST_CASE("run_pipeline: rerun with the same seed is byte-identical") {
    std::string out1 = temp_path("det_a.jsonl");
    std::string out2 = temp_path("det_b.jsonl");
    std::filesystem::remove(out1);
    std::filesystem::remove(out2);

    SynthConfig cfg = small_config(120, 29);
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        run_pipeline(cfg, fixture_db(), *teacher, out1);
    }
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        run_pipeline(cfg, fixture_db(), *teacher, out2);
    }
    CHECK(read_file(out1) == read_file(out2));
}

TEST_CASE("normalized duplicates hash identically") {
    std::vector<std::string> corpus = {
        "placeDesign\n", "placeDesign  \n", "placeDesign;\n", "# c\nplaceDesign\n",
        "placeDesign\n",
    };
    std::set<std::string> hashes;
    for (const auto& s : corpus) hashes.insert(normalized_hash(s));
    CHECK(hashes.size() == 1);
}

TEST_CASE("run_pipeline: teacher transport failure drops the tuple, run continues") {
    std::string out = temp_path("drops.jsonl");
    std::filesystem::remove(out);

    llm::MockFixture seq;
    seq.mode = llm::MockFixture::Mode::Sequence;
    seq.sequence = {
        {0, "", "", true},  // transport failure: first fragment's requirement call
        {0, "", "", true},
        {0, "", "", true},
        {0, "", "", true},  // retries exhausted (max_retries=3 -> 4 sends)
        {200, "BEGIN_REQUIREMENT\nReq.\nEND_REQUIREMENT"},
        {200, "BEGIN_COT\nCot.\nEND_COT"},
        {200, "BEGIN_REQUIREMENT\nReq two.\nEND_REQUIREMENT"},
        {200, "BEGIN_COT\nCot two.\nEND_COT"},
    };
    llm::EndpointConfig ep = teacher_endpoint();
    ep.max_retries = 3;
    auto [teacher, transport] = llm::make_mock_client(ep, seq);

    SynthConfig cfg = small_config(3, 31);
    cfg.mutation_probability = 0.0;
    cfg.stage3_concurrency = 1;  // keep the sequence aligned with fragments
    PipelineResult result = run_pipeline(cfg, fixture_db(), *teacher, out);

    bool transport_drop = false;
    for (const DropRecord& d : result.drops)
        if (d.stage == "teacher-transport") transport_drop = true;
    CHECK(transport_drop);
    CHECK(result.counts.emitted >= 1);
}

TEST_CASE("run_pipeline: interrupt and resume is byte-identical") {
    std::string full = temp_path("resume_full.jsonl");
    std::string partial = temp_path("resume_partial.jsonl");
    std::filesystem::remove(full);
    std::filesystem::remove(partial);

    SynthConfig cfg = small_config(100, 37);
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        run_pipeline(cfg, fixture_db(), *teacher, full);
    }
    {
        // Simulated kill right after Stage 2: no Stage-3 fragment completes.
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        PipelineHooks hooks;
        hooks.max_stage3_fragments = 0;
        PipelineResult r = run_pipeline(cfg, fixture_db(), *teacher, partial, {}, hooks);
        CHECK(r.interrupted);
        CHECK(r.counts.emitted == 0);
    }
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        run_pipeline(cfg, fixture_db(), *teacher, partial);
    }
    CHECK(read_file(full) == read_file(partial));

    // Interrupt mid-way through stage 3 as well.
    std::string mid = temp_path("resume_mid.jsonl");
    std::filesystem::remove(mid);
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        PipelineHooks hooks;
        hooks.max_stage3_fragments = 7;
        run_pipeline(cfg, fixture_db(), *teacher, mid, {}, hooks);
    }
    {
        auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
        run_pipeline(cfg, fixture_db(), *teacher, mid);
    }
    CHECK(read_file(full) == read_file(mid));
}

TEST_CASE("monotone stage counts") {
    std::string out = temp_path("monotone.jsonl");
    std::filesystem::remove(out);
    auto [teacher, t] = llm::make_mock_client(teacher_endpoint(), contract_teacher());
    SynthConfig cfg = small_config(150, 41);
    PipelineResult r = run_pipeline(cfg, fixture_db(), *teacher, out);
    CHECK(r.counts.generated >= r.counts.lint_pass);
    CHECK(r.counts.lint_pass >= r.counts.deduped);
    CHECK(r.counts.deduped >= r.counts.emitted);
}

TEST_SUITE_END();
