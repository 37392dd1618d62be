#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "dagforge/dagforge.hpp"

namespace dagforge::testing {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "dagforge") {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<unsigned> counter{0};
        path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline ProviderSpec mock_spec(const std::string& id, int tier,
                              std::chrono::milliseconds latency = std::chrono::milliseconds(0)) {
    ProviderSpec spec;
    spec.id = id;
    spec.tier = tier;
    spec.simulated_latency = latency;
    return spec;
}

/// A gateway with a single clean mock provider.
inline std::unique_ptr<ProviderGateway> mock_gateway(int tier = 10) {
    auto gw = std::make_unique<ProviderGateway>();
    gw->register_provider(mock_spec("mock", tier));
    return gw;
}

inline PortSpec port(const std::string& name, PrimitiveType type) {
    return PortSpec{name, type, std::nullopt};
}

/// PURE node with an echo-style body (first like-typed input, else zero).
inline Node pure_node(const std::string& id, std::vector<PortSpec> inputs,
                      std::vector<PortSpec> outputs, const std::string& body) {
    Node n;
    n.id = id;
    n.name = id;
    n.floor = TypeFloor::Pure;
    n.state = ResolutionState::FullyResolved;
    n.description = "node " + id;
    n.inputs = std::move(inputs);
    n.outputs = std::move(outputs);
    n.spec = Contract{};
    n.body = body;
    return n;
}

/// str-chain of PURE echo nodes: a -> b -> ... (first node emits a literal).
inline WorkflowGraph pure_chain(int n) {
    WorkflowGraph g;
    g.name = "chain";
    std::string prev;
    for (int i = 0; i < n; ++i) {
        std::string id = "n" + std::to_string(i);
        if (i == 0) {
            g.nodes.push_back(pure_node(id, {}, {port("out1", PrimitiveType::Str)},
                                        "out.out1 = \"seed\";"));
        } else {
            g.nodes.push_back(pure_node(id, {port("in1", PrimitiveType::Str)},
                                        {port("out1", PrimitiveType::Str)},
                                        "out.out1 = concat(in1, \"+\");"));
            g.edges.push_back({{prev, "out1"}, {id, "in1"}});
        }
        prev = id;
    }
    return g;
}

/// Random valid graph for property tests: a DAG of PURE str nodes with echo
/// bodies, random extra metadata, deterministic under the given rng.
inline WorkflowGraph random_pure_graph(std::mt19937_64& rng, int max_nodes = 8) {
    int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    WorkflowGraph g;
    g.name = "g" + std::to_string(rng() % 1000);
    for (int i = 0; i < n; ++i) {
        std::string id = "n" + std::to_string(100 + i);  // fixed width, no substring aliasing
        std::vector<PortSpec> inputs;
        // candidate upstream nodes: later we add at most one edge per input
        int in_count = i == 0 ? 0 : static_cast<int>(rng() % 3);
        for (int k = 0; k < in_count; ++k)
            inputs.push_back(port("in" + std::to_string(k + 1), PrimitiveType::Str));
        std::string body;
        for (const auto& p : inputs) (void)p;
        if (!inputs.empty())
            body = "out.out1 = upper(" + inputs[0].name + ");";
        else
            body = "out.out1 = \"x" + std::to_string(rng() % 100) + "\";";
        Node node = pure_node(id, inputs, {port("out1", PrimitiveType::Str)}, body);
        if (rng() % 2) node.description = "step " + std::to_string(i);
        if (rng() % 3 == 0) node.context.push_back("note " + std::to_string(rng() % 10));
        g.nodes.push_back(node);
        for (std::size_t k = 0; k < g.nodes.back().inputs.size(); ++k) {
            // pick a strictly earlier node to feed this input (acyclic)
            std::string src = "n" + std::to_string(100 + static_cast<int>(rng() % static_cast<unsigned>(i)));
            g.edges.push_back({{src, "out1"}, {id, g.nodes.back().inputs[k].name}});
        }
    }
    return g;
}

inline std::string etl_text() {
    return "Fetch data from API \xE2\x86\x92 clean data \xE2\x86\x92 load into PostgreSQL";
}

}  // namespace dagforge::testing
