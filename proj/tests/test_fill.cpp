#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "support/helpers.hpp"

using namespace dagforge;
using namespace dagforge::testing;

namespace {

SchemaNode person_schema() {
    return SchemaNode::object(
        {{"name", SchemaNode::scalar(PrimitiveType::Str, "full name")},
         {"age", SchemaNode::scalar(PrimitiveType::Int, "age in years")},
         {"address",
          SchemaNode::object({{"city", SchemaNode::scalar(PrimitiveType::Str)},
                              {"zip", SchemaNode::scalar(PrimitiveType::Str)}})},
         {"tags", SchemaNode::list(SchemaNode::scalar(PrimitiveType::Str), "labels")}});
}

/// Independent leaf enumeration: scalar paths (lists of scalars and whole
/// object-lists each count as one leaf).
void enumerate_leaves(const SchemaNode& s, const std::string& path,
                      std::set<std::string>& leaves) {
    switch (s.kind) {
        case SchemaNode::Kind::Scalar:
            leaves.insert(path);
            return;
        case SchemaNode::Kind::List:
            leaves.insert(path);  // filled whole
            return;
        case SchemaNode::Kind::Object:
            for (const auto& [name, child] : s.fields)
                enumerate_leaves(child, path.empty() ? name : path + "." + name, leaves);
            return;
    }
}

std::set<std::string> plan_coverage(const FillPlan& plan) {
    std::set<std::string> covered;
    for (const auto& level : plan.levels)
        for (const auto& g : level) {
            if (!g.is_call()) continue;
            for (const auto& f : g.fields) {
                std::string path = g.path.empty() ? f : g.path + "." + f;
                REQUIRE_FALSE(covered.count(path));  // exactly once
                covered.insert(path);
            }
        }
    return covered;
}

std::mt19937_64 schema_rng(4242);

SchemaNode random_schema(std::mt19937_64& rng, int depth, int& leaf_budget) {
    std::map<std::string, SchemaNode> fields;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n && leaf_budget > 0; ++i) {
        std::string name = "f" + std::to_string(i) + "_" + std::to_string(rng() % 100);
        unsigned roll = rng() % 6;
        if (depth > 0 && roll == 0) {
            fields[name] = random_schema(rng, depth - 1, leaf_budget);
        } else if (roll == 1) {
            --leaf_budget;
            fields[name] = SchemaNode::list(SchemaNode::object(
                {{"x", SchemaNode::scalar(PrimitiveType::Int)},
                 {"y", SchemaNode::scalar(PrimitiveType::Str)}}));
        } else {
            --leaf_budget;
            PrimitiveType kinds[] = {PrimitiveType::Str, PrimitiveType::Int,
                                     PrimitiveType::Float, PrimitiveType::Bool,
                                     PrimitiveType::ListStr, PrimitiveType::ListInt};
            fields[name] = SchemaNode::scalar(kinds[rng() % 6]);
        }
    }
    return SchemaNode::object(std::move(fields));
}

}  // namespace

TEST_CASE("decompose: all-scalar object is one group") {
    auto schema = SchemaNode::object({{"name", SchemaNode::scalar(PrimitiveType::Str)},
                                      {"age", SchemaNode::scalar(PrimitiveType::Int)}});
    FillPlan plan = decompose(schema);
    REQUIRE(plan.levels.size() == 1);
    REQUIRE(plan.levels[0].size() == 1);
    CHECK(plan.levels[0][0].kind == FillGroup::Kind::Scalars);
    CHECK(plan.levels[0][0].fields == std::vector<std::string>{"age", "name"});
    CHECK(plan.call_count() == 1);
}

TEST_CASE("decompose: nested object example") {
    FillPlan plan = decompose(person_schema());
    REQUIRE(plan.levels.size() == 2);
    // level 0: one scalar group {age, name, tags} and the address branch
    REQUIRE(plan.levels[0].size() == 2);
    CHECK(plan.levels[0][0].kind == FillGroup::Kind::Scalars);
    CHECK(plan.levels[0][0].fields == (std::vector<std::string>{"age", "name", "tags"}));
    CHECK(plan.levels[0][1].kind == FillGroup::Kind::Branch);
    CHECK(plan.levels[0][1].fields == std::vector<std::string>{"address"});
    // level 1: address scalars
    REQUIRE(plan.levels[1].size() == 1);
    CHECK(plan.levels[1][0].path == "address");
    CHECK(plan.levels[1][0].fields == (std::vector<std::string>{"city", "zip"}));
    CHECK(plan.call_count() == 2);
}

TEST_CASE("decompose: two independent branches sit in one level") {
    auto schema = SchemaNode::object(
        {{"a", SchemaNode::object({{"x", SchemaNode::scalar(PrimitiveType::Str)}})},
         {"b", SchemaNode::object({{"y", SchemaNode::scalar(PrimitiveType::Str)}})}});
    FillPlan plan = decompose(schema);
    REQUIRE(plan.levels.size() == 2);
    int branches = 0;
    for (const auto& g : plan.levels[0])
        if (g.kind == FillGroup::Kind::Branch) ++branches;
    CHECK(branches == 2);
    CHECK(plan.levels[1].size() == 2);  // both branch scalar groups, parallelizable
}

TEST_CASE("decompose coverage property") {
    for (int i = 0; i < 200; ++i) {
        int budget = 40;
        SchemaNode schema = random_schema(schema_rng, 3, budget);
        std::set<std::string> leaves;
        enumerate_leaves(schema, "", leaves);
        FillPlan plan = decompose(schema);
        CHECK(plan_coverage(plan) == leaves);
    }
}

TEST_CASE("merge: disjoint branches, duplicates, missing") {
    auto schema = SchemaNode::object(
        {{"a", SchemaNode::object({{"x", SchemaNode::scalar(PrimitiveType::Str)}})},
         {"b", SchemaNode::object({{"y", SchemaNode::scalar(PrimitiveType::Str)}})}});
    std::vector<PartialInstance> partials = {{"a", Json{{"x", "1"}}}, {"b", Json{{"y", "2"}}}};
    Json merged = merge(partials, schema);
    CHECK(merged.at("a").at("x") == "1");
    CHECK(merged.at("b").at("y") == "2");

    std::vector<PartialInstance> dup = {{"a", Json{{"x", "1"}}}, {"a", Json{{"x", "2"}}}};
    CHECK_THROWS_WITH(merge(dup, schema), Catch::Matchers::ContainsSubstring("a.x"));

    std::vector<PartialInstance> missing = {{"a", Json{{"x", "1"}}}};
    CHECK_THROWS_AS(merge(missing, schema), ValidationError);
}

TEST_CASE("fill: all-scalar schema costs exactly one call") {
    auto gw = mock_gateway();
    auto schema = SchemaNode::object({{"a", SchemaNode::scalar(PrimitiveType::Str)},
                                      {"b", SchemaNode::scalar(PrimitiveType::Int)},
                                      {"c", SchemaNode::scalar(PrimitiveType::Float)},
                                      {"d", SchemaNode::scalar(PrimitiveType::Bool)}});
    Json instance = fill(schema, "ctx", 5, 5, *gw);
    CHECK(gw->request_count() == 1);
    CHECK(validate_instance(instance, schema).empty());
}

TEST_CASE("fill: empty object costs zero calls") {
    auto gw = mock_gateway();
    Json instance = fill(SchemaNode::object({}), "ctx", 5, 5, *gw);
    CHECK(instance == Json::object());
    CHECK(gw->request_count() == 0);
}

TEST_CASE("fill: end-to-end nested example validates") {
    auto gw = mock_gateway();
    Json instance = fill(person_schema(), "ctx", 11, 5, *gw);
    CHECK(validate_instance(instance, person_schema()).empty());
    CHECK(gw->request_count() == 2);  // root scalars + address scalars
}

TEST_CASE("fill determinism: same schema, context, seed") {
    auto schema = person_schema();
    auto gw1 = mock_gateway();
    auto gw2 = mock_gateway();
    Json a = fill(schema, "ctx", 7, 5, *gw1);
    Json b = fill(schema, "ctx", 7, 5, *gw2);
    CHECK(a == b);
    auto gw3 = mock_gateway();
    Json c = fill(schema, "ctx", 8, 5, *gw3);
    CHECK(a != c);
}

TEST_CASE("fill prompts carry only the group's own fields") {
    auto gw = mock_gateway();
    std::vector<std::string> prompts;
    std::mutex m;
    gw->set_request_listener([&](const GenerationRequest& r) {
        std::lock_guard<std::mutex> lock(m);
        prompts.push_back(r.prompt);
    });
    fill(person_schema(), "the person record", 7, 5, *gw);
    REQUIRE(prompts.size() == 2);
    for (const auto& p : prompts) {
        if (p.find("path: address") != std::string::npos) {
            CHECK(p.find("field: city") != std::string::npos);
            CHECK(p.find("field: zip") != std::string::npos);
            CHECK(p.find("name") == std::string::npos);
            CHECK(p.find("tags") == std::string::npos);
        } else {
            CHECK(p.find("field: age") != std::string::npos);
            CHECK(p.find("field: name") != std::string::npos);
            CHECK(p.find("field: tags") != std::string::npos);
            CHECK(p.find("city") == std::string::npos);
        }
        CHECK(p.find("context: the person record") != std::string::npos);
    }
}

TEST_CASE("fill: failing group regenerates with fresh prompts, then succeeds") {
    ProviderSpec spec = mock_spec("m", 5);
    // survives the gateway's own 3 tries once, then the regeneration works
    spec.script.push_back({RequestKind::FillGroup, "field: age", true, std::nullopt, 3});
    ProviderGateway gw;
    gw.register_provider(spec);
    auto schema = SchemaNode::object({{"age", SchemaNode::scalar(PrimitiveType::Int)}});
    Json instance = fill(schema, "ctx", 5, 5, gw);
    CHECK(validate_instance(instance, schema).empty());
    CHECK(gw.invocation_count() == 4);  // 3 scripted failures + 1 success
}

TEST_CASE("fill: group failure after regeneration attempts") {
    ProviderSpec spec = mock_spec("m", 5);
    spec.script.push_back({RequestKind::FillGroup, "", true, std::nullopt, -1});
    ProviderGateway gw;
    gw.register_provider(spec);
    auto schema = SchemaNode::object({{"age", SchemaNode::scalar(PrimitiveType::Int)}});
    CHECK_THROWS_AS(fill(schema, "ctx", 5, 5, gw), ProviderError);
}

TEST_CASE("parallelism: level wall clock is one latency unit, not group count") {
    // six independent branches, no root scalars: one level of six calls
    std::map<std::string, SchemaNode> fields;
    for (int i = 0; i < 6; ++i)
        fields["branch" + std::to_string(i)] =
            SchemaNode::object({{"v", SchemaNode::scalar(PrimitiveType::Str)}});
    auto schema = SchemaNode::object(std::move(fields));

    ProviderGateway gw;
    gw.register_provider(mock_spec("m", 5, std::chrono::milliseconds(100)));
    FillOptions options;
    options.max_concurrency = 8;

    auto t0 = std::chrono::steady_clock::now();
    Json instance = fill(schema, "ctx", 3, 5, gw, options);
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    CHECK(validate_instance(instance, schema).empty());
    CHECK(gw.request_count() == 6);
    CHECK(elapsed < 150.0);  // 1.5 * D * L with D = 1, L = 100ms

    // sequential baseline for the speedup claim
    ProviderGateway seq_gw;
    seq_gw.register_provider(mock_spec("m", 5, std::chrono::milliseconds(100)));
    FillOptions sequential;
    sequential.max_concurrency = 1;
    auto t1 = std::chrono::steady_clock::now();
    fill(schema, "ctx", 3, 5, seq_gw, sequential);
    auto seq_elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t1)
                           .count();
    CHECK(seq_elapsed >= 600.0);
    CHECK(seq_elapsed / elapsed >= 3.0);
}

TEST_CASE("parallelism bound: depth-D plan within 1.5 * D * L") {
    // depth 2: root scalars, one branch with scalars, nested branch
    auto schema = SchemaNode::object(
        {{"top", SchemaNode::scalar(PrimitiveType::Str)},
         {"mid", SchemaNode::object(
                     {{"v", SchemaNode::scalar(PrimitiveType::Str)},
                      {"deep", SchemaNode::object(
                                   {{"w", SchemaNode::scalar(PrimitiveType::Str)}})}})}});
    FillPlan plan = decompose(schema);
    REQUIRE(plan.levels.size() == 3);

    ProviderGateway gw;
    gw.register_provider(mock_spec("m", 5, std::chrono::milliseconds(100)));
    auto t0 = std::chrono::steady_clock::now();
    fill(schema, "ctx", 3, 5, gw);
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    CHECK(elapsed <= 1.5 * 3 * 100.0);
}

TEST_CASE("schema document round-trip and normalization") {
    std::string doc = R"({
      "type": "object",
      "fields": {
        "tags": {"type": "list", "element": {"type": "str"}, "description": "labels"},
        "rows": {"type": "list", "element": {"type": "object", "fields": {"n": {"type": "int"}}}},
        "name": {"type": "str"}
      }
    })";
    SchemaNode schema = parse_schema(doc, "json");
    // list of scalars normalizes to a scalar list leaf
    CHECK(schema.fields.at("tags").kind == SchemaNode::Kind::Scalar);
    CHECK(schema.fields.at("tags").scalar_type == PrimitiveType::ListStr);
    CHECK(schema.fields.at("rows").kind == SchemaNode::Kind::List);
    std::string canonical = canonical_schema_json(schema);
    SchemaNode back = schema_from_doc(Json::parse(canonical));
    CHECK(canonical_schema_json(back) == canonical);
}

TEST_CASE("instance validation is strict") {
    auto schema = SchemaNode::object({{"n", SchemaNode::scalar(PrimitiveType::Int)}});
    CHECK(validate_instance(Json{{"n", 3}}, schema).empty());
    CHECK_FALSE(validate_instance(Json{{"n", "x"}}, schema).empty());
    CHECK_FALSE(validate_instance(Json{{"n", 3}, {"extra", 1}}, schema).empty());
    CHECK_FALSE(validate_instance(Json::object(), schema).empty());
    CHECK_FALSE(validate_instance(Json{{"n", 3.5}}, schema).empty());  // no float-for-int
}
