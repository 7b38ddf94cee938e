#include "scanpick/error.hpp"
#include "scanpick/percolation.hpp"
#include "scanpick/random.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace scanpick {
namespace {

using testing::from_rows;

BinaryImage picture(int w, int h, std::initializer_list<Pixel> black) {
    BinaryImage b(w, h);
    for (const auto& p : black) b.set(p.row, p.col, true);
    return b;
}

std::vector<std::size_t> sizes(const std::vector<Cluster>& cs) {
    std::vector<std::size_t> out;
    for (const auto& c : cs) out.push_back(c.pixel_count);
    return out;
}

TEST(Binarize, BoundaryIsInclusive) {
    const auto bin = binarize(from_rows({{0.3, 0.5}, {0.386, 0.2}}), 0.386);
    EXPECT_FALSE(bin.at(0, 0));
    EXPECT_TRUE(bin.at(0, 1));
    EXPECT_TRUE(bin.at(1, 0));
    EXPECT_FALSE(bin.at(1, 1));
}

TEST(Binarize, ExtremeThresholds) {
    const auto img = testing::random_image(9, 7, 2);
    EXPECT_EQ(binarize(img, -1.0).black_count(), img.size());
    EXPECT_EQ(binarize(img, 2.0).black_count(), 0u);
}

TEST(TriNeighbors, Interior) {
    const auto n = tri_neighbors(5, 5, 10, 10);
    const std::set<Pixel> got(n.begin(), n.end());
    const std::set<Pixel> want{{4, 5}, {6, 5}, {5, 4}, {5, 6}, {4, 6}, {6, 4}};
    EXPECT_EQ(got, want);
}

TEST(TriNeighbors, Corners) {
    const auto origin = tri_neighbors(0, 0, 10, 10);
    EXPECT_EQ(std::set<Pixel>(origin.begin(), origin.end()), (std::set<Pixel>{{1, 0}, {0, 1}}));

    const auto top_right = tri_neighbors(0, 9, 10, 10);
    EXPECT_EQ(std::set<Pixel>(top_right.begin(), top_right.end()),
              (std::set<Pixel>{{0, 8}, {1, 9}, {1, 8}}));
}

TEST(TriNeighbors, OutOfBoundsThrows) {
    EXPECT_THROW(tri_neighbors(10, 0, 10, 10), InputDomainError);
    EXPECT_THROW(tri_neighbors(0, -1, 10, 10), InputDomainError);
}

TEST(TriNeighbors, AdjacencyIsSymmetric) {
    const int w = 7, h = 5;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            for (const auto& q : tri_neighbors(r, c, w, h)) {
                const auto back = tri_neighbors(q.row, q.col, w, h);
                EXPECT_NE(std::find(back.begin(), back.end(), Pixel{r, c}), back.end());
            }
        }
    }
}

TEST(BlackClusters, TrivialCases) {
    EXPECT_TRUE(black_clusters(BinaryImage(5, 5)).empty());
    const auto one = black_clusters(picture(5, 5, {{2, 3}}));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].pixel_count, 1u);
    EXPECT_EQ(one[0].bbox, (BoundingBox{2, 3, 2, 3}));
}

TEST(BlackClusters, OnlyTheAntiDiagonalConnects) {
    // (0,0)-(1,1) is the missing diagonal: two clusters.
    EXPECT_EQ(black_clusters(picture(3, 3, {{0, 0}, {1, 1}})).size(), 2u);
    // (0,1)-(1,0) is an edge: one cluster.
    EXPECT_EQ(black_clusters(picture(3, 3, {{0, 1}, {1, 0}})).size(), 1u);
}

TEST(BlackClusters, IdsFollowRowMajorDiscovery) {
    const auto cs = black_clusters(picture(6, 4, {{3, 0}, {0, 4}, {0, 5}, {2, 2}}));
    ASSERT_EQ(cs.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(cs[i].id, i);
    EXPECT_EQ(cs[0].pixels.front(), (Pixel{0, 4}));
    EXPECT_EQ(cs[1].pixels.front(), (Pixel{2, 2}));
    EXPECT_EQ(cs[2].pixels.front(), (Pixel{3, 0}));
}

TEST(BlackClusters, FullImageIsOneCluster) {
    const auto cs = black_clusters(BinaryImage(40, 30, true));
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_EQ(cs[0].pixel_count, 1200u);
    EXPECT_EQ(cs[0].bbox, (BoundingBox{0, 0, 29, 39}));
}

TEST(BlackClusters, LargeImageDoesNotRecurse) {
    // A serpentine covering most of a 600x600 picture would overflow a recursive DFS.
    BinaryImage b(600, 600);
    for (int r = 0; r < 600; ++r) {
        if (r % 2 == 0) {
            for (int c = 0; c < 600; ++c) b.set(r, c, true);
        } else {
            b.set(r, (r / 2) % 2 == 0 ? 599 : 0, true);
        }
    }
    const auto cs = black_clusters(b);
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_EQ(cs[0].pixel_count, b.black_count());
}

// Independent oracle: union-find over the same edge set, compared as partitions.
std::vector<int> union_find_labels(const BinaryImage& b) {
    const int w = b.width(), h = b.height();
    std::vector<int> parent(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    const auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!b.at(r, c)) continue;
            // Forward half of the 6-neighbourhood.
            for (const auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{1, -1}}) {
                const int nr = r + dr, nc = c + dc;
                if (nr < h && nc >= 0 && nc < w && b.at(nr, nc)) {
                    parent[find(r * w + c)] = find(nr * w + nc);
                }
            }
        }
    }
    std::vector<int> label(parent.size(), -1);
    for (int i = 0; i < w * h; ++i) {
        if (b.bits()[i]) label[i] = find(i);
    }
    return label;
}

TEST(BlackClusters, PartitionMatchesUnionFind) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto b = bernoulli_field(23, 17, 0.3 + 0.01 * static_cast<double>(seed), seed);
        const auto cs = black_clusters(b);
        const auto uf = union_find_labels(b);

        std::vector<int> ours(b.size(), -1);
        std::size_t total = 0;
        for (const auto& c : cs) {
            total += c.pixel_count;
            for (const auto& p : c.pixels) {
                ASSERT_TRUE(b.at(p.row, p.col));
                ASSERT_EQ(ours[p.row * 23 + p.col], -1) << "pixel in two clusters";
                ours[p.row * 23 + p.col] = c.id;
            }
        }
        EXPECT_EQ(total, b.black_count());
        // Same partition: i ~ j under ours iff under union-find.
        for (std::size_t i = 0; i < b.size(); ++i) {
            for (std::size_t j = i + 1; j < b.size(); ++j) {
                if (ours[i] < 0 || ours[j] < 0) continue;
                ASSERT_EQ(ours[i] == ours[j], uf[i] == uf[j]);
            }
        }
    }
}

TEST(BlackClusters, ClustersAreMaximal) {
    const auto b = bernoulli_field(30, 30, 0.45, 9);
    const auto cs = black_clusters(b);
    std::vector<int> owner(b.size(), -1);
    for (const auto& c : cs) {
        for (const auto& p : c.pixels) owner[p.row * 30 + p.col] = c.id;
    }
    for (const auto& c : cs) {
        for (const auto& p : c.pixels) {
            for (const auto& q : tri_neighbors(p.row, p.col, 30, 30)) {
                if (b.at(q.row, q.col)) EXPECT_EQ(owner[q.row * 30 + q.col], c.id);
            }
        }
    }
}

TEST(FilterClusters, KeepsLargeOnesInOrder) {
    std::vector<Cluster> cs(3);
    cs[0].id = 0; cs[0].pixel_count = 5;
    cs[1].id = 1; cs[1].pixel_count = 30;
    cs[2].id = 2; cs[2].pixel_count = 200;
    const auto kept = filter_clusters(cs, 30);
    EXPECT_EQ(sizes(kept), (std::vector<std::size_t>{30, 200}));
    EXPECT_EQ(kept[0].id, 1);
    EXPECT_EQ(filter_clusters(cs, 1), cs);
    EXPECT_TRUE(filter_clusters({}, 30).empty());
    EXPECT_THROW(filter_clusters(cs, 0), InputDomainError);
}

TEST(BernoulliField, Extremes) {
    EXPECT_EQ(bernoulli_field(20, 10, 0.0, 1).black_count(), 0u);
    const auto full = bernoulli_field(20, 10, 1.0, 1);
    const auto cs = black_clusters(full);
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_EQ(cs[0].pixel_count, 200u);
    EXPECT_THROW(bernoulli_field(5, 5, 1.5, 1), InputDomainError);
    EXPECT_THROW(bernoulli_field(5, 5, -0.1, 1), InputDomainError);
}

TEST(BernoulliField, ReproducibleFromSeed) {
    EXPECT_EQ(bernoulli_field(32, 32, 0.5, 7), bernoulli_field(32, 32, 0.5, 7));
    EXPECT_NE(bernoulli_field(32, 32, 0.5, 7), bernoulli_field(32, 32, 0.5, 8));
}

TEST(BernoulliField, HalfDensityConcentrates) {
    // 200 fields of 65536 sites: sd of the pooled fraction is ~1.4e-4, the band is 0.01.
    double black = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto f = bernoulli_field(256, 256, 0.5, derive_seed(3, s));
        const double frac = static_cast<double>(f.black_count()) / 65536.0;
        EXPECT_NEAR(frac, 0.5, 0.01);
        black += frac;
    }
    EXPECT_NEAR(black / 200.0, 0.5, 0.001);
}

TEST(Render, RoundTripsKeptClusters) {
    const auto b = bernoulli_field(25, 25, 0.55, 4);
    const auto cs = black_clusters(b);
    EXPECT_EQ(render_clusters(cs, 25, 25), b);
    const auto pgm = encode_binary_pgm(b);
    EXPECT_EQ(pgm.substr(0, 11), "P5\n25 25\n1\n");
    EXPECT_EQ(pgm.size(), 11u + 625u);
}

}  // namespace
}  // namespace scanpick
