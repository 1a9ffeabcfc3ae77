#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbmmrf/ingest.hpp"

using namespace sbmmrf;

namespace {

std::vector<csv::Row> rows(const std::string& text) {
    std::istringstream in(text);
    return csv::read(in);
}

std::filesystem::path temp_dir() {
    auto d = std::filesystem::temp_directory_path() / ("sbmmrf_ingest_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
}

} // namespace

TEST(Ingest, FiltersTaxaByNonZeroCount) {
    const auto table = rows("sample_id,A,B,C\ns1,1,2,0\ns2,3,0,0\ns3,1,1,5\n");
    auto m = parse_abundance(table, 2);
    EXPECT_EQ(m.taxa, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(m.n(), 3u);
    EXPECT_EQ(m.counts(2, 1), 1);
}

TEST(Ingest, ZeroThresholdKeepsEverything) {
    auto m = parse_abundance(rows("sample_id,A,B,C\ns1,1,2,0\ns2,3,0,0\n"), 0);
    EXPECT_EQ(m.p(), 3u);
}

TEST(Ingest, FilteringIsIdempotent) {
    auto once = parse_abundance(rows("sample_id,A,B,C,D\ns1,1,2,0,0\ns2,3,0,1,0\ns3,1,1,5,2\n"), 2);
    auto twice = filter_taxa(once, 2);
    EXPECT_EQ(once.taxa, twice.taxa);
    EXPECT_EQ(once.counts, twice.counts);
}

TEST(Ingest, DropsSamplesEmptiedByFiltering) {
    auto m = parse_abundance(rows("sample_id,A,B\ns1,1,0\ns2,2,0\ns3,0,4\n"), 2);
    EXPECT_EQ(m.taxa, std::vector<std::string>{"A"});
    EXPECT_EQ(m.samples, (std::vector<std::string>{"s1", "s2"}));
    EXPECT_EQ(m.dropped_samples, std::vector<std::string>{"s3"});
}

TEST(Ingest, AbundanceErrors) {
    try {
        parse_abundance(rows("sample_id,A,B\ns1,1,2\ns2,1\n"), 0);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
    }
    EXPECT_THROW(parse_abundance(rows("sample_id,A,B\ns1,1,-2\n"), 0), ValidationError);
    EXPECT_THROW(parse_abundance(rows("sample_id,A,B\ns1,1,2.5\n"), 0), ValidationError);
    EXPECT_THROW(parse_abundance(rows("sample_id,A,B\ns1,0,0\n"), 0), ValidationError);
    EXPECT_THROW(parse_abundance(rows("sample_id,A,A\ns1,1,1\n"), 0), ValidationError);
    EXPECT_THROW(parse_abundance(rows("sample_id,A,B\ns1,1,1\ns1,2,2\n"), 0), ValidationError);
    EXPECT_THROW(parse_abundance(rows("sample_id,A,B\ns1,1,0\ns2,1,0\n"), 3), EmptyResultError);
}

TEST(Ingest, TaxonomyCoverage) {
    auto tax = parse_taxonomy(rows("taxon,parent\ns1,g1\nextra,g9\n"), {"s1"});
    EXPECT_EQ(tax.size(), 1u);
    EXPECT_EQ(tax.parent("s1"), "g1");

    try {
        parse_taxonomy(rows("taxon,parent\ns1,g1\n"), {"s1", "s2", "s3"});
        FAIL() << "expected CoverageError";
    } catch (const CoverageError& e) {
        EXPECT_EQ(e.missing(), (std::vector<std::string>{"s2", "s3"}));
    }
    EXPECT_THROW(parse_taxonomy(rows("taxon,parent\ns1,g1\ns1,g2\n"), {"s1"}), ValidationError);
}

TEST(Ingest, EdgeListThresholding) {
    auto nets = parse_network(rows("source,target,weight\na,b,3\nb,c,1\n"), 2.0);
    const auto& g = nets.unweighted;
    const auto& q = nets.thresholded;
    ASSERT_EQ(g.labels(), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(g.has_edge(0, 1));
    EXPECT_TRUE(g.has_edge(1, 2));
    EXPECT_TRUE(q.has_edge(0, 1));
    EXPECT_FALSE(q.has_edge(1, 2));
    // strict inequality
    auto at = parse_network(rows("source,target,weight\na,b,2\n"), 2.0);
    EXPECT_FALSE(at.thresholded.has_edge(0, 1));
}

TEST(Ingest, EdgeListEdgeCases) {
    auto empty = parse_network(rows("source,target,weight\n"), 2.0, std::vector<std::string>{"a", "b"});
    EXPECT_EQ(empty.unweighted.edge_count(), 0u);
    EXPECT_EQ(empty.unweighted.size(), 2u);

    auto loops = parse_network(rows("source,target,weight\na,a,3\na,b,1\n"), 0.0);
    EXPECT_EQ(loops.self_loops_skipped, 1u);
    EXPECT_EQ(loops.unweighted.edge_count(), 1u);

    EXPECT_THROW(parse_network(rows("source,target,weight\na,z,1\n"), 0.0, std::vector<std::string>{"a", "b"}),
                 ValidationError);
    EXPECT_THROW(parse_network(rows("source,target,weight\na,b,x\n"), 0.0), ValidationError);
    EXPECT_THROW(parse_network(rows("source,target,weight\na,b,1\n"), -1.0), ValidationError);
}

TEST(Ingest, LesMiserablesEdgeList) {
    auto nets = load_network(std::filesystem::path(SBMMRF_DATA_DIR) / "lesmiserables_edges.csv", 2.0);
    EXPECT_EQ(nets.unweighted.size(), 77u);
    EXPECT_EQ(nets.unweighted.edge_count(), 254u);
    EXPECT_EQ(nets.thresholded.edge_count(), 107u);
}

TEST(Ingest, AdjacencyRoundTrip) {
    BinaryNetwork g({"x", "y,z", "w"});
    g.set_edge(0, 1);
    g.set_edge(1, 2);
    const auto path = temp_dir() / "adj.csv";
    write_adjacency(path, g);
    EXPECT_EQ(load_adjacency(path), g);
}

TEST(Ingest, AdjacencyValidation) {
    EXPECT_THROW(parse_adjacency(rows("node,a,b\na,0,1\nb,0,0\n")), ValidationError);
    EXPECT_THROW(parse_adjacency(rows("node,a,b\na,1,0\nb,0,0\n")), ValidationError);
    EXPECT_THROW(parse_adjacency(rows("node,a,b\na,0,2\nb,2,0\n")), ValidationError);
    EXPECT_THROW(parse_adjacency(rows("node,a,b\nb,0,1\na,1,0\n")), ParseError);
}

TEST(Ingest, MissingFile) {
    EXPECT_THROW(load_abundance("/nonexistent/abundance.csv", 0), InputError);
}
