#pragma once

#include <cmath>

namespace latkey::detail {

// Zigzag frontier for one enumeration level: candidates are visited by
// increasing distance from the rounded center; a side stays dead once a
// candidate on it fails the radius test (the partial norm is quadratic in
// the coefficient, so failures on a side are final).
struct ZigzagLevel {
    long long base = 0;        // round(center)
    long long up = 1, dn = 1;  // next untried offset magnitude per side
    bool up_dead = false, dn_dead = false;
    bool down_turn = false;    // side the next zigzag pick prefers
    long long cur_off = 0;

    void reset(long double center) {
        base = llroundl(center);
        up = dn = 1;
        up_dead = dn_dead = false;
        down_turn = static_cast<long double>(base) >= center;
        cur_off = 0;
    }

    void kill_current_side() {
        if (cur_off == 0)
            up_dead = dn_dead = true;
        else if (cur_off > 0)
            up_dead = true;
        else
            dn_dead = true;
    }

    // Moves to the next untried candidate; false when the level is exhausted.
    bool advance() {
        if (up_dead && dn_dead) return false;
        bool take_down = dn_dead ? false : (up_dead ? true : down_turn);
        if (take_down) {
            cur_off = -dn;
            ++dn;
        } else {
            cur_off = up;
            ++up;
        }
        down_turn = !take_down;
        return true;
    }

    long long value() const { return base + cur_off; }
};

}  // namespace latkey::detail
