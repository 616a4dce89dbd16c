#include "mxad/scoring.hpp"

#include <cmath>
#include <filesystem>
#include <map>

#include <doctest.h>

#include "mxad/error.hpp"
#include "mxad/graph.hpp"
#include "naive_encoder.hpp"
#include "testutil.hpp"

using namespace mxad;

namespace {

double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("edge score closed forms") {
    const int d = 4;
    Tensor h = Tensor::zeros(3, d);
    Tensor a = Tensor::constant(1, d, 1.0);
    Tensor b = Tensor::constant(1, d, 1.0);

    // all-zero embeddings: phi = sigmoid(-mu)
    CHECK(edge_score(h, 0, 1, a, b, 1.0, 0.3) == doctest::Approx(ref_sigmoid(-0.3)));
    CHECK(edge_score(h, 0, 1, a, b, 1.0, 0.3) == doctest::Approx(0.42555748));

    // squared norm exactly mu -> phi = 0.5
    Tensor h2 = Tensor::zeros(2, d);
    h2.at(0, 0) = std::sqrt(0.3);  // a (.) h_u contributes 0.3 in one coordinate
    CHECK(edge_score(h2, 0, 1, a, b, 1.0, 0.3) == doctest::Approx(0.5));

    // eta scales sharpness around mu
    h2.at(0, 0) = 1.0;
    const double base = edge_score(h2, 0, 1, a, b, 1.0, 0.3);
    const double sharp = edge_score(h2, 0, 1, a, b, 4.0, 0.3);
    CHECK(sharp > base);
}

TEST_CASE("edge score is monotone along a ray") {
    const int d = 3;
    Rng rng(5);
    Tensor a = Tensor::uniform(1, d, 1.0, rng);
    Tensor b = Tensor::uniform(1, d, 1.0, rng);
    Tensor dir = Tensor::uniform(1, d, 1.0, rng);
    double prev = -1.0;
    // small eta keeps the sigmoid away from saturation so strict growth holds
    for (int k = 1; k <= 8; ++k) {
        Tensor h = Tensor::zeros(2, d);
        for (int j = 0; j < d; ++j) {
            h.at(0, j) = k * dir.at(0, j);
            h.at(1, j) = k * dir.at(0, j);
        }
        const double phi = edge_score(h, 0, 1, a, b, 0.02, 0.3);
        CHECK(phi > prev);
        prev = phi;
    }
}

TEST_CASE("identical score vectors make the score symmetric in (u, v)") {
    const int d = 5;
    Rng rng(7);
    Tensor h = Tensor::uniform(4, d, 1.0, rng);
    Tensor a = Tensor::uniform(1, d, 1.0, rng);
    CHECK(edge_score(h, 1, 3, a, a, 1.0, 0.3) ==
          doctest::Approx(edge_score(h, 3, 1, a, a, 1.0, 0.3)));
}

TEST_CASE("edge_score_batch matches scalar path and naive oracle") {
    const int d = 4;
    Rng rng(11);
    Tensor h = Tensor::uniform(6, d, 1.0, rng);
    Tensor a = Tensor::uniform(1, d, 1.0, rng);
    Tensor b = Tensor::uniform(1, d, 1.0, rng);
    std::vector<std::size_t> us{0, 2, 4, 1};
    std::vector<std::size_t> vs{1, 3, 5, 5};
    Tensor phi = edge_score_batch(h, us, vs, a, b, 1.3, 0.25);
    REQUIRE(phi.rows() == 4);
    REQUIRE(phi.cols() == 1);

    naive::Params np;
    np.a = naive::to_mat(a)[0];
    np.b = naive::to_mat(b)[0];
    np.eta = 1.3;
    np.mu = 0.25;
    naive::Mat hm = naive::to_mat(h);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double scalar =
            edge_score(h, static_cast<int>(us[i]), static_cast<int>(vs[i]), a, b, 1.3, 0.25);
        CHECK(phi.at(i, 0) == doctest::Approx(scalar));
        CHECK(std::abs(phi.at(i, 0) -
                       naive::edge_score(hm, static_cast<int>(us[i]), static_cast<int>(vs[i]),
                                         np)) < 1e-12);
    }
}

TEST_CASE("edge_score_batch gradient vs finite differences") {
    const int d = 3;
    Rng rng(13);
    Tensor h = Tensor::uniform(5, d, 1.0, rng, true);
    Tensor a = Tensor::uniform(1, d, 1.0, rng, true);
    Tensor b = Tensor::uniform(1, d, 1.0, rng, true);
    std::vector<std::size_t> us{0, 1, 2};
    std::vector<std::size_t> vs{3, 4, 0};
    testutil::check_gradients(
        {h, a, b}, [&] { return sum_all(edge_score_batch(h, us, vs, a, b, 1.0, 0.3)); }, 1e-5,
        1e-4);
}

TEST_CASE("negative sampler replacement-side probabilities") {
    // Path 0-1-2-3 plus isolated 4..9 in relation 0.
    Snapshot s(0, 10, 1);
    s.add_edge(0, 1, 0, 0.0);
    s.add_edge(1, 2, 0, 0.0);
    s.add_edge(2, 3, 0, 0.0);

    SUBCASE("deg 1 vs 2 edge corrupts the endpoint in proportion 1:2") {
        // Edge (0, 1): deg(0)=1, deg(1)=2 -> replace 0 w.p. 1/3 per attempt.
        // Rejections re-flip the side, so the accepted fraction is weighted by
        // each side's acceptance rate: corrupting u succeeds for 7 of 10 draws
        // (not 1 itself, not 0 or 2), corrupting v for 8 of 10, giving
        // (1/3 * 0.7) / (1/3 * 0.7 + 2/3 * 0.8) = 7/23.
        Rng rng(17);
        int replaced_u = 0;
        const int trials = 30000;
        for (int i = 0; i < trials; ++i) {
            auto [nu, nv] = negative_sample(s, 0, 0, 1, rng);
            CHECK(!s.has_edge(nu, nv, 0));
            CHECK(nu != nv);
            if (nv == 1) ++replaced_u;  // v kept means u was the replaced side
        }
        const double frac = static_cast<double>(replaced_u) / trials;
        CHECK(std::abs(frac - 7.0 / 23.0) < 0.015);
    }

    SUBCASE("equal degrees corrupt either side with probability 1/2") {
        // Edge (1, 2): deg(1)=deg(2)=2.
        Rng rng(19);
        int kept_v = 0;
        const int trials = 30000;
        for (int i = 0; i < trials; ++i) {
            auto [nu, nv] = negative_sample(s, 0, 1, 2, rng);
            if (nv == 2) ++kept_v;
        }
        CHECK(std::abs(kept_v / static_cast<double>(trials) - 0.5) < 0.03);
    }

    SUBCASE("isolated pair splits 1/2 before rejection weighting") {
        // Both sides accept 9 of 10 draws (only the self-loop rejects), but a
        // u-corruption can redraw u = 8, so the strictly-corrupted-u fraction
        // is (1/2 * 8/10) / (9/10) = 4/9.
        Rng rng(23);
        int kept_v = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) {
            auto [nu, nv] = negative_sample(s, 0, 8, 9, rng);
            if (nv == 9 && nu != 8) ++kept_v;
        }
        CHECK(std::abs(kept_v / static_cast<double>(trials) - 4.0 / 9.0) < 0.02);
    }
}

TEST_CASE("negative sampler output is always a non-edge") {
    Rng grng(29);
    MultiplexDynamicGraph g;
    g.num_nodes = 12;
    g.num_relations = 2;
    for (int r = 0; r < 2; ++r)
        for (int u = 0; u < 12; ++u)
            for (int v = u + 1; v < 12; ++v)
                if (grng.bernoulli(0.3)) g.edges.push_back({u, v, r, 0.0});
    auto s = partition_snapshots(g, 1)[0];
    Rng rng(31);
    for (const auto& e : s.edges()) {
        auto [nu, nv] = negative_sample(s, e.relation, e.u, e.v, rng);
        CHECK(nu != nv);
        CHECK(!s.has_edge(nu, nv, e.relation));
    }
}

TEST_CASE("negative sampler exhausts retries on a complete relation") {
    Snapshot s(0, 3, 1);
    s.add_edge(0, 1, 0, 0.0);
    s.add_edge(0, 2, 0, 0.0);
    s.add_edge(1, 2, 0, 0.0);
    Rng rng(37);
    CHECK_THROWS_AS(negative_sample(s, 0, 0, 1, rng, 50), SamplingError);
}

TEST_CASE("hinge loss closed forms") {
    // Separated by more than the margin -> zero loss.
    Tensor pos = Tensor::from({0.1, 0.2}, 2, 1);
    Tensor neg = Tensor::from({0.9, 0.95}, 2, 1);
    CHECK(hinge_loss(pos, neg, 0.5).item() == 0.0);

    // Equal scores -> gamma per pair.
    Tensor same = Tensor::from({0.4, 0.4}, 2, 1);
    CHECK(hinge_loss(same, same, 0.5).item() == doctest::Approx(1.0));

    // One violating pair: max{0, 0.5 + 0.8 - 0.6} = 0.7.
    Tensor p = Tensor::from({0.8}, 1, 1);
    Tensor n = Tensor::from({0.6}, 1, 1);
    CHECK(hinge_loss(p, n, 0.5).item() == doctest::Approx(0.7));
}

TEST_CASE("hinge loss gradient pushes positives below negatives") {
    const int d = 3;
    Rng rng(41);
    Tensor h = Tensor::uniform(4, d, 1.0, rng, true);
    Tensor a = Tensor::uniform(1, d, 0.5, rng, true);
    Tensor b = Tensor::uniform(1, d, 0.5, rng, true);
    std::vector<std::size_t> pu{0}, pv{1}, nu{2}, nv{3};

    auto loss_value = [&] {
        Tensor pos = edge_score_batch(h, pu, pv, a, b, 1.0, 0.3);
        Tensor neg = edge_score_batch(h, nu, nv, a, b, 1.0, 0.3);
        return hinge_loss(pos, neg, 0.5);
    };

    // A few plain gradient steps on the embeddings must reduce the loss.
    const double before = loss_value().item();
    REQUIRE(before > 0.0);
    for (int it = 0; it < 20; ++it) {
        h.zero_grad();
        a.zero_grad();
        b.zero_grad();
        Tensor loss = loss_value();
        backward(loss);
        for (std::size_t i = 0; i < h.size(); ++i)
            h.data()[i] -= 0.5 * h.grad()[i];
    }
    CHECK(loss_value().item() < before);
}

TEST_CASE("score file round trip and ordering") {
    std::vector<ScoredEdge> scores{
        {1, 0, 3, 4, 0.25, 1, AnomalyKind::LayerDependent},
        {0, 1, 0, 2, 0.75, 0, AnomalyKind::None},
        {0, 0, 1, 2, 0.5, -1, AnomalyKind::None},
    };
    auto path = (std::filesystem::temp_directory_path() / "mxad_scores_test.tsv").string();
    write_scores(path, scores);
    auto back = load_scores(path);
    REQUIRE(back.size() == 3);
    // sorted by (t, r, u, v)
    CHECK(back[0].t == 0);
    CHECK(back[0].relation == 0);
    CHECK(back[0].label == -1);
    CHECK(back[1].relation == 1);
    CHECK(back[1].score == doctest::Approx(0.75));
    CHECK(back[2].t == 1);
    CHECK(back[2].label == 1);
}
