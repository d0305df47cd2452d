//! Row-chunked worker pool built on scoped threads.
//!
//! Each row is produced by exactly one closure call regardless of the
//! thread count, so row-wise outputs are bit-identical for any `threads`.

pub(crate) fn for_each_row_chunk(
    values: &mut [f64],
    row_len: usize,
    threads: usize,
    task: impl Fn(usize, &mut [f64]) + Sync,
) {
    assert!(row_len > 0 && values.len() % row_len == 0);
    let rows = values.len() / row_len;
    if threads <= 1 || rows <= 1 {
        for (i, row) in values.chunks_mut(row_len).enumerate() {
            task(i, row);
        }
        return;
    }
    let per = rows.div_ceil(threads.min(rows));
    std::thread::scope(|scope| {
        for (ci, chunk) in values.chunks_mut(per * row_len).enumerate() {
            let task = &task;
            scope.spawn(move || {
                for (k, row) in chunk.chunks_mut(row_len).enumerate() {
                    task(ci * per + k, row);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_is_invisible() {
        let fill = |i: usize, row: &mut [f64]| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (i * 31 + j) as f64 * 0.1;
            }
        };
        let mut a = vec![0.0; 7 * 5];
        let mut b = vec![0.0; 7 * 5];
        let mut c = vec![0.0; 7 * 5];
        for_each_row_chunk(&mut a, 5, 1, fill);
        for_each_row_chunk(&mut b, 5, 3, fill);
        for_each_row_chunk(&mut c, 5, 16, fill);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
