#include "mca/instrument.hpp"

namespace mca::instrument {

Counters &counters()
{
    static Counters c;
    return c;
}

void reset()
{
    Counters &c = counters();
    c.predictor_states = 0;
    c.pair_predictions = 0;
    c.distance_evals = 0;
    c.fcm_runs = 0;
    c.lsq_factorizations = 0;
}

Snapshot snapshot()
{
    Counters &c = counters();
    return Snapshot{
        c.predictor_states.load(),   c.pair_predictions.load(),
        c.distance_evals.load(),     c.fcm_runs.load(),
        c.lsq_factorizations.load(),
    };
}

} // namespace mca::instrument
